//! Small dense linear-algebra and statistics helpers.
//!
//! Everything here operates on `Vec<f64>` rows; the dimensions involved are
//! tiny (feature counts, M+1 Newton systems), so direct algorithms are used
//! throughout.

/// Row-major symmetric matrix stored densely.
#[derive(Debug, Clone)]
pub struct SymMatrix {
    pub n: usize,
    pub data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] += v;
    }
}

/// Cholesky factorization of a symmetric positive-definite matrix.
///
/// Returns the lower-triangular factor L with A = L Lᵀ, or `None` if a
/// non-positive pivot is encountered (matrix not positive definite).
#[allow(clippy::needless_range_loop)]
pub fn cholesky(a: &SymMatrix) -> Option<SymMatrix> {
    let n = a.n;
    let mut l = SymMatrix::zeros(n);
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a.get(i, j);
            for k in 0..j {
                sum -= l.get(i, k) * l.get(j, k);
            }
            if i == j {
                if sum <= 0.0 || !sum.is_finite() {
                    return None;
                }
                l.set(i, j, sum.sqrt());
            } else {
                l.set(i, j, sum / l.get(j, j));
            }
        }
    }
    Some(l)
}

/// Solves A x = b given the Cholesky factor L of A (forward then back
/// substitution).
#[allow(clippy::needless_range_loop)]
pub fn cholesky_solve(l: &SymMatrix, b: &[f64]) -> Vec<f64> {
    let n = l.n;
    debug_assert_eq!(b.len(), n);
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut sum = b[i];
        for k in 0..i {
            sum -= l.get(i, k) * y[k];
        }
        y[i] = sum / l.get(i, i);
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut sum = y[i];
        for k in (i + 1)..n {
            sum -= l.get(k, i) * x[k];
        }
        x[i] = sum / l.get(i, i);
    }
    x
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn l2_norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.iter().sum::<f64>() / values.len() as f64
}

/// Population variance (divide by N).
pub fn variance(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let m = mean(values);
    values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / values.len() as f64
}

/// Linear-interpolation percentile (the R-7 convention) of `values`.
///
/// `p` is in percent, `[0, 100]`. The input need not be sorted.
pub fn percentile(values: &[f64], p: f64) -> f64 {
    assert!(!values.is_empty(), "percentile of empty slice");
    assert!((0.0..=100.0).contains(&p), "percentile out of [0,100]");
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("NaN in percentile input"));
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * p / 100.0;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        let frac = h - lo as f64;
        sorted[lo] + frac * (sorted[hi] - sorted[lo])
    }
}

/// Pearson correlation coefficient; `None` when either side has (numerically)
/// zero variance.
pub fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    assert_eq!(a.len(), b.len());
    let n = a.len();
    if n < 2 {
        return None;
    }
    let ma = mean(a);
    let mb = mean(b);
    let mut cov = 0.0;
    let mut va = 0.0;
    let mut vb = 0.0;
    for i in 0..n {
        let da = a[i] - ma;
        let db = b[i] - mb;
        cov += da * db;
        va += da * da;
        vb += db * db;
    }
    if va <= 0.0 || vb <= 0.0 {
        return None;
    }
    Some(cov / (va.sqrt() * vb.sqrt()))
}

/// Ordinal 1-based ranks of `values` by descending absolute value; ties are
/// broken toward the smaller index. `ranks[j] == 1` means feature `j` has the
/// largest |value|.
pub fn abs_desc_ranks(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| {
        values[j]
            .abs()
            .partial_cmp(&values[i].abs())
            .expect("NaN in rank input")
            .then(i.cmp(&j))
    });
    let mut ranks = vec![0usize; values.len()];
    for (pos, &idx) in order.iter().enumerate() {
        ranks[idx] = pos + 1;
    }
    ranks
}

/// Argsort ascending with ties broken by index.
pub fn argsort(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| {
        values[i]
            .partial_cmp(&values[j])
            .expect("NaN in argsort input")
            .then(i.cmp(&j))
    });
    order
}

/// First two principal components of `rows`, returned as per-row (x, y)
/// coordinates. Power iteration with deflation on the covariance matrix;
/// deterministic (fixed start vectors).
#[allow(clippy::needless_range_loop)]
pub fn pca_2d(rows: &[Vec<f64>]) -> Vec<(f64, f64)> {
    let n = rows.len();
    if n == 0 {
        return Vec::new();
    }
    let m = rows[0].len();
    if m == 0 {
        return vec![(0.0, 0.0); n];
    }
    let mut means = vec![0.0; m];
    for row in rows {
        for (j, v) in row.iter().enumerate() {
            means[j] += v;
        }
    }
    for v in &mut means {
        *v /= n as f64;
    }
    let centered: Vec<Vec<f64>> = rows
        .iter()
        .map(|row| row.iter().zip(&means).map(|(v, mu)| v - mu).collect())
        .collect();
    let mut cov = SymMatrix::zeros(m);
    for row in &centered {
        for i in 0..m {
            for j in 0..m {
                cov.add(i, j, row[i] * row[j] / n as f64);
            }
        }
    }

    let mut components: Vec<Vec<f64>> = Vec::new();
    for comp in 0..2.min(m) {
        // Deterministic start: a mildly irregular vector so it is almost
        // never orthogonal to the leading eigenvector.
        let mut v: Vec<f64> = (0..m)
            .map(|j| 1.0 + ((j * 7 + comp * 13 + 3) % 11) as f64 / 11.0)
            .collect();
        normalize_in_place(&mut v);
        for _ in 0..500 {
            let mut w = vec![0.0; m];
            for i in 0..m {
                let mut s = 0.0;
                for j in 0..m {
                    s += cov.get(i, j) * v[j];
                }
                w[i] = s;
            }
            // Deflate previously found components.
            for c in &components {
                let proj = dot(&w, c);
                for (wi, ci) in w.iter_mut().zip(c) {
                    *wi -= proj * ci;
                }
            }
            let norm = l2_norm(&w);
            if norm < 1e-300 {
                break;
            }
            for wi in &mut w {
                *wi /= norm;
            }
            let delta: f64 = v.iter().zip(&w).map(|(a, b)| (a - b).abs()).sum();
            v = w;
            if delta < 1e-12 {
                break;
            }
        }
        components.push(v);
    }

    centered
        .iter()
        .map(|row| {
            let x = dot(row, &components[0]);
            let y = if components.len() > 1 {
                dot(row, &components[1])
            } else {
                0.0
            };
            (x, y)
        })
        .collect()
}

fn normalize_in_place(v: &mut [f64]) {
    let norm = l2_norm(v);
    if norm > 0.0 {
        for x in v {
            *x /= norm;
        }
    }
}
