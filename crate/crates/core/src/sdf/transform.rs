//! Exact squared Euclidean distance transform by separable lower envelopes
//! of parabolas (Felzenszwalb & Huttenlocher).

/// Marker for "no target reachable"; kept out of the envelope so the
/// intersection arithmetic never sees it.
pub(crate) const UNREACHED: f64 = f64::INFINITY;

/// Squared distance, in voxel units, from every voxel to the nearest voxel
/// for which `target` is true. Voxels with no target anywhere in the grid get
/// [`UNREACHED`].
pub(crate) fn squared_edt(target: &[bool], shape: [usize; 3]) -> Vec<f64> {
    let len = shape[0] * shape[1] * shape[2];
    debug_assert_eq!(target.len(), len);
    let mut grid: Vec<f64> = target.iter().map(|&t| if t { 0.0 } else { UNREACHED }).collect();

    let longest = shape.iter().copied().max().unwrap_or(0);
    let mut scratch = Envelope::with_capacity(longest);
    let mut line = vec![0.0; longest];
    let mut out = vec![0.0; longest];

    let strides = [1, shape[0], shape[0] * shape[1]];
    for axis in 0..3 {
        let n = shape[axis];
        if n <= 1 {
            continue;
        }
        let stride = strides[axis];
        // iterate over every line parallel to `axis`
        let (a, b) = match axis {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        };
        for u in 0..shape[a] {
            for v in 0..shape[b] {
                let start = u * strides[a] + v * strides[b];
                for i in 0..n {
                    line[i] = grid[start + i * stride];
                }
                scratch.transform(&line[..n], &mut out[..n]);
                for i in 0..n {
                    grid[start + i * stride] = out[i];
                }
            }
        }
    }
    grid
}

/// Reusable buffers for the 1-D lower-envelope transform.
struct Envelope {
    sites: Vec<usize>,
    bounds: Vec<f64>,
}

impl Envelope {
    fn with_capacity(n: usize) -> Self {
        Envelope { sites: Vec::with_capacity(n), bounds: Vec::with_capacity(n + 1) }
    }

    /// `out[q] = min_p (q - p)^2 + f[p]` over finite `f[p]`.
    fn transform(&mut self, f: &[f64], out: &mut [f64]) {
        self.sites.clear();
        self.bounds.clear();
        for (p, &fp) in f.iter().enumerate() {
            if fp == UNREACHED {
                continue;
            }
            loop {
                match self.sites.last() {
                    None => {
                        self.sites.push(p);
                        self.bounds.push(f64::NEG_INFINITY);
                        break;
                    }
                    Some(&v) => {
                        let s = intersection(f, v, p);
                        if s <= *self.bounds.last().unwrap() {
                            self.sites.pop();
                            self.bounds.pop();
                        } else {
                            self.sites.push(p);
                            self.bounds.push(s);
                            break;
                        }
                    }
                }
            }
        }
        if self.sites.is_empty() {
            out.fill(UNREACHED);
            return;
        }
        let mut k = 0;
        for (q, slot) in out.iter_mut().enumerate() {
            let qf = q as f64;
            while k + 1 < self.sites.len() && self.bounds[k + 1] < qf {
                k += 1;
            }
            let p = self.sites[k];
            let d = q as f64 - p as f64;
            *slot = d * d + f[p];
        }
    }
}

#[inline]
fn intersection(f: &[f64], v: usize, p: usize) -> f64 {
    let (vf, pf) = (v as f64, p as f64);
    ((f[p] + pf * pf) - (f[v] + vf * vf)) / (2.0 * (pf - vf))
}
