//! Small descriptive statistics used by the experiment reports.

/// z-value of a two-sided 95% normal interval.
pub const Z95: f64 = 1.96;

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (n - 1 denominator); zero for fewer than two
/// values.
pub fn sample_sd(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

pub fn median(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Normal-approximation 95% confidence interval of the mean. A single value
/// has zero width.
pub fn mean_ci95(xs: &[f64]) -> (f64, f64) {
    let m = mean(xs);
    let half = Z95 * sample_sd(xs) / (xs.len().max(1) as f64).sqrt();
    (m - half, m + half)
}

/// Mean, spread, and median of a sample.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    /// Half-width of the 95% interval of individual values, `1.96·sd`.
    pub spread95: f64,
    pub median: f64,
}

impl Summary {
    pub fn of(xs: &[f64]) -> Self {
        Summary { count: xs.len(), mean: mean(xs), spread95: Z95 * sample_sd(xs), median: median(xs) }
    }
}
