use nalgebra::DVector;

use super::ParticleSet;

/// Per-dimension bandwidth selection.
#[derive(Clone, Debug, PartialEq)]
pub enum Bandwidth {
    /// `1.06 * sigma_d * k^(-1/5)` from the weighted sample spread.
    Silverman,
    Fixed(DVector<f64>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct KdeSettings {
    pub bandwidth: Bandwidth,
    /// Smallest bandwidth allowed in any dimension (rad).
    pub floor: f64,
}

impl Default for KdeSettings {
    fn default() -> Self {
        KdeSettings { bandwidth: Bandwidth::Silverman, floor: 1e-3 }
    }
}

/// Weighted Gaussian product-kernel density estimate.
#[derive(Clone, Debug)]
pub struct Kde {
    centers: Vec<DVector<f64>>,
    weights: Vec<f64>,
    inv_bandwidth: DVector<f64>,
    bandwidth: DVector<f64>,
    /// `prod_d 1 / (sqrt(2 pi) h_d)`
    peak: f64,
}

impl Kde {
    /// Fit to the particle offsets, honoring their weights. Zero total weight
    /// falls back to uniform weights.
    pub fn fit(set: &ParticleSet, settings: &KdeSettings) -> Self {
        assert!(!set.is_empty(), "kernel density estimate needs at least one particle");
        let centers: Vec<DVector<f64>> = set.particles().iter().map(|p| p.offset.clone()).collect();
        let total: f64 = set.particles().iter().map(|p| p.weight).sum();
        let weights: Vec<f64> = if total > 0.0 && total.is_finite() {
            set.particles().iter().map(|p| p.weight / total).collect()
        } else {
            vec![1.0 / centers.len() as f64; centers.len()]
        };
        let dim = centers[0].len();
        let bandwidth = match &settings.bandwidth {
            Bandwidth::Fixed(h) => h.map(|v| v.max(settings.floor)),
            Bandwidth::Silverman => {
                let k = centers.len() as f64;
                let mut mean = DVector::zeros(dim);
                for (c, w) in centers.iter().zip(&weights) {
                    mean.axpy(*w, c, 1.0);
                }
                let mut var = DVector::zeros(dim);
                for (c, w) in centers.iter().zip(&weights) {
                    let d = c - &mean;
                    var += d.component_mul(&d) * *w;
                }
                var.map(|v| (1.06 * v.sqrt() * k.powf(-0.2)).max(settings.floor))
            }
        };
        assert_eq!(bandwidth.len(), dim, "bandwidth vector has the wrong dimension");
        let inv_bandwidth = bandwidth.map(|h| 1.0 / h);
        let peak = bandwidth.iter().map(|h| 1.0 / ((2.0 * std::f64::consts::PI).sqrt() * h)).product();
        Kde { centers, weights, inv_bandwidth, bandwidth, peak }
    }

    pub fn bandwidth(&self) -> &DVector<f64> {
        &self.bandwidth
    }

    pub fn max_bandwidth(&self) -> f64 {
        self.bandwidth.max()
    }

    pub fn density(&self, q: &DVector<f64>) -> f64 {
        let mut sum = 0.0;
        for (c, w) in self.centers.iter().zip(&self.weights) {
            if *w == 0.0 {
                continue;
            }
            let mut e = 0.0;
            for d in 0..q.len() {
                let z = (q[d] - c[d]) * self.inv_bandwidth[d];
                e += z * z;
            }
            sum += w * (-0.5 * e).exp();
        }
        sum * self.peak
    }

    /// `ln density(q)`, evaluated with log-sum-exp so that points far from
    /// every center still compare by distance instead of underflowing to 0.
    pub fn log_density(&self, q: &DVector<f64>) -> f64 {
        let exponents: Vec<(f64, f64)> = self
            .centers
            .iter()
            .zip(&self.weights)
            .filter(|(_, w)| **w > 0.0)
            .map(|(c, w)| {
                let mut e = 0.0;
                for d in 0..q.len() {
                    let z = (q[d] - c[d]) * self.inv_bandwidth[d];
                    e += z * z;
                }
                (w.ln(), -0.5 * e)
            })
            .collect();
        let top = exponents.iter().map(|(lw, e)| lw + e).fold(f64::NEG_INFINITY, f64::max);
        if top == f64::NEG_INFINITY {
            return top;
        }
        let sum: f64 = exponents.iter().map(|(lw, e)| (lw + e - top).exp()).sum();
        top + sum.ln() + self.peak.ln()
    }
}

/// Density of `q` under the kernel estimate built from `set`.
pub fn kde_weight(set: &ParticleSet, q: &DVector<f64>, settings: &KdeSettings) -> f64 {
    Kde::fit(set, settings).density(q)
}
