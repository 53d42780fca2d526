//! Baseline correlation and significance machinery: Pearson coefficients and
//! matrices, correlation-strength labels, shuffled surrogates with
//! significance bands, Jarque-Bera and ARCH LM diagnostics.

use alloc::string::String;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;
use thiserror::Error;

use crate::rng::{substream_seed, Rng};

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("input needs at least {need} values, got {have}")]
    TooShort { have: usize, need: usize },
    #[error("constant input")]
    ConstantInput,
    #[error("coefficient {0} outside [-1, 1]")]
    CoefficientOutOfRange(f64),
    #[error("series lengths differ: {x} vs {y}")]
    LengthMismatch { x: usize, y: usize },
    #[error("need at least 2 surrogate realizations, got {0}")]
    TooFewRealizations(usize),
    #[error("lag order {lags} too large for series of length {len}")]
    LagTooLarge { lags: usize, len: usize },
    #[error("singular regressor matrix")]
    SingularRegression,
    #[error("statistic failed on surrogate realization {realization}: {message}")]
    StatisticFailed { realization: usize, message: String },
    #[error("statistic cell count changed across realizations")]
    CellCountMismatch,
    #[error("need at least 2 series, got {0}")]
    TooFewSeries(usize),
}

/// Sample Pearson correlation coefficient.
///
/// Requires at least two observations and nonconstant inputs; the result is
/// clamped into [-1, 1] against last-bit overshoot.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch {
            x: x.len(),
            y: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(StatsError::TooShort {
            have: x.len(),
            need: 2,
        });
    }
    let n = x.len() as f64;
    let mean_x = x.iter().sum::<f64>() / n;
    let mean_y = y.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var_x = 0.0;
    let mut var_y = 0.0;
    for (&a, &b) in x.iter().zip(y) {
        let dx = a - mean_x;
        let dy = b - mean_y;
        cov += dx * dy;
        var_x += dx * dx;
        var_y += dy * dy;
    }
    if var_x == 0.0 || var_y == 0.0 {
        return Err(StatsError::ConstantInput);
    }
    Ok((cov / libm::sqrt(var_x * var_y)).clamp(-1.0, 1.0))
}

/// Conventional naming for correlation magnitudes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strength {
    /// |C| < 0.1
    Insignificant,
    /// 0.1 <= |C| < 0.3
    Small,
    /// 0.3 <= |C| < 0.5
    Medium,
    /// 0.5 <= |C| <= 1.0
    Large,
}

impl core::fmt::Display for Strength {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(match self {
            Strength::Insignificant => "insignificant",
            Strength::Small => "small",
            Strength::Medium => "medium",
            Strength::Large => "large",
        })
    }
}

/// Label a coefficient by magnitude; negative coefficients are labeled by
/// their absolute value.
pub fn classify_strength(c: f64) -> Result<Strength, StatsError> {
    let a = c.abs();
    if !(0.0..=1.0).contains(&a) {
        return Err(StatsError::CoefficientOutOfRange(c));
    }
    Ok(if a < 0.1 {
        Strength::Insignificant
    } else if a < 0.3 {
        Strength::Small
    } else if a < 0.5 {
        Strength::Medium
    } else {
        Strength::Large
    })
}

/// Uniform random permutation of a copy of `values` (Fisher-Yates, seeded).
pub fn shuffle(values: &[f64], seed: u64) -> Vec<f64> {
    let mut out = values.to_vec();
    Rng::new(seed).shuffle(&mut out);
    out
}

/// Which inputs get shuffled in each surrogate realization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ShuffleMode {
    /// Both series shuffled independently.
    #[default]
    Both,
    /// Only the first series shuffled; the second stays as observed.
    FirstOnly,
}

/// Surrogate-ensemble configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurrogateSpec {
    pub n_realizations: usize,
    pub seed: u64,
    pub mode: ShuffleMode,
    /// Significance band width multiplier: significant when
    /// |observed| > |mean| + band_k * sigma.
    pub band_k: f64,
}

impl SurrogateSpec {
    pub const DEFAULT_REALIZATIONS: usize = 100;

    pub fn new(n_realizations: usize, seed: u64) -> Result<Self, StatsError> {
        if n_realizations < 2 {
            return Err(StatsError::TooFewRealizations(n_realizations));
        }
        Ok(SurrogateSpec {
            n_realizations,
            seed,
            mode: ShuffleMode::Both,
            band_k: 1.0,
        })
    }

    pub fn with_mode(mut self, mode: ShuffleMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_band_k(mut self, k: f64) -> Self {
        self.band_k = k;
        self
    }
}

/// Mean and standard deviation of a statistic over shuffled surrogates, one
/// entry per statistic cell (a scalar statistic has one cell; a surface has
/// one per (q, s)).
#[derive(Debug, Clone, PartialEq)]
pub struct SurrogateBand {
    pub mean: Vec<f64>,
    pub sigma: Vec<f64>,
    pub n_realizations: usize,
}

impl SurrogateBand {
    /// |observed| > |mean| + k * sigma for the given cell.
    pub fn is_significant(&self, cell: usize, observed: f64, k: f64) -> bool {
        observed.abs() > self.mean[cell].abs() + k * self.sigma[cell]
    }
}

/// Shuffled copies of a pair for surrogate realization `index`.
///
/// Realization streams derive from the ensemble seed as
/// `substream(seed, 2*index)` for x and `substream(seed, 2*index + 1)` for y,
/// so realizations are independent and may be evaluated in any order or in
/// parallel with identical results.
pub fn surrogate_pair(
    x: &[f64],
    y: &[f64],
    spec: &SurrogateSpec,
    index: usize,
) -> (Vec<f64>, Vec<f64>) {
    let sx = shuffle(x, substream_seed(spec.seed, 2 * index as u64));
    let sy = match spec.mode {
        ShuffleMode::Both => shuffle(y, substream_seed(spec.seed, 2 * index as u64 + 1)),
        ShuffleMode::FirstOnly => y.to_vec(),
    };
    (sx, sy)
}

/// Reduce per-realization statistic vectors to a per-cell mean and sample
/// standard deviation, in fixed realization order.
pub fn band_from_samples(samples: &[Vec<f64>]) -> Result<SurrogateBand, StatsError> {
    if samples.len() < 2 {
        return Err(StatsError::TooFewRealizations(samples.len()));
    }
    let cells = samples[0].len();
    if samples.iter().any(|s| s.len() != cells) {
        return Err(StatsError::CellCountMismatch);
    }
    let n = samples.len() as f64;
    let mut mean = vec![0.0; cells];
    for sample in samples {
        for (m, v) in mean.iter_mut().zip(sample) {
            *m += v;
        }
    }
    for m in mean.iter_mut() {
        *m /= n;
    }
    let mut sigma = vec![0.0; cells];
    for sample in samples {
        for (s, (v, m)) in sigma.iter_mut().zip(sample.iter().zip(&mean)) {
            let d = v - m;
            *s += d * d;
        }
    }
    for s in sigma.iter_mut() {
        *s = libm::sqrt(*s / (n - 1.0));
    }
    Ok(SurrogateBand {
        mean,
        sigma,
        n_realizations: samples.len(),
    })
}

/// Evaluate `stat` on `spec.n_realizations` shuffled surrogates of (x, y) and
/// band the results per cell.
///
/// The statistic returns its cells as a flat vector; scalar statistics return
/// one cell, rho surfaces one cell per (q, s) in q-major order.
pub fn significance_band<F, E>(
    x: &[f64],
    y: &[f64],
    spec: &SurrogateSpec,
    mut stat: F,
) -> Result<SurrogateBand, StatsError>
where
    F: FnMut(&[f64], &[f64]) -> Result<Vec<f64>, E>,
    E: core::fmt::Display,
{
    if spec.n_realizations < 2 {
        return Err(StatsError::TooFewRealizations(spec.n_realizations));
    }
    let mut samples = Vec::with_capacity(spec.n_realizations);
    for r in 0..spec.n_realizations {
        let (sx, sy) = surrogate_pair(x, y, spec, r);
        let cells = stat(&sx, &sy).map_err(|e| StatsError::StatisticFailed {
            realization: r,
            message: e.to_string(),
        })?;
        samples.push(cells);
    }
    band_from_samples(&samples)
}

/// Jarque-Bera normality statistic with its moment ingredients.
///
/// Kurtosis is the population-style moment ratio `m4 / m2^2` (not excess), so
/// the Gaussian reference value is 3.
#[derive(Debug, Clone, PartialEq)]
pub struct JarqueBera {
    pub statistic: f64,
    pub skewness: f64,
    pub kurtosis: f64,
    pub n: usize,
}

/// JB = n/6 * (S^2 + (K - 3)^2 / 4).
pub fn jarque_bera(x: &[f64]) -> Result<JarqueBera, StatsError> {
    let n = x.len();
    if n < 4 {
        return Err(StatsError::TooShort { have: n, need: 4 });
    }
    let nf = n as f64;
    let mean = x.iter().sum::<f64>() / nf;
    let mut m2 = 0.0;
    let mut m3 = 0.0;
    let mut m4 = 0.0;
    for &v in x {
        let d = v - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= nf;
    m3 /= nf;
    m4 /= nf;
    if m2 == 0.0 {
        return Err(StatsError::ConstantInput);
    }
    let skewness = m3 / libm::pow(m2, 1.5);
    let kurtosis = m4 / (m2 * m2);
    let statistic = nf / 6.0 * (skewness * skewness + (kurtosis - 3.0) * (kurtosis - 3.0) / 4.0);
    Ok(JarqueBera {
        statistic,
        skewness,
        kurtosis,
        n,
    })
}

/// ARCH LM heteroskedasticity statistic.
#[derive(Debug, Clone, PartialEq)]
pub struct ArchLm {
    pub statistic: f64,
    pub r_squared: f64,
    pub lags: usize,
    /// Rows in the auxiliary regression: series length minus lags.
    pub n_obs: usize,
}

/// Engle's LM test: OLS of x_t^2 on a constant and x_{t-1..t-p}^2;
/// LM = (n - p) * R^2, asymptotically chi-squared with p degrees of freedom
/// under the no-ARCH null.
#[allow(clippy::needless_range_loop)] // index loops mirror the matrix algebra
pub fn arch_lm(x: &[f64], lags: usize) -> Result<ArchLm, StatsError> {
    let n = x.len();
    if lags == 0 || n <= lags + 2 {
        return Err(StatsError::LagTooLarge { lags, len: n });
    }
    let sq: Vec<f64> = x.iter().map(|v| v * v).collect();
    let rows = n - lags;
    let dim = lags + 1;

    // Normal equations for [1, sq_{t-1}, ..., sq_{t-p}].
    let mut ata = vec![vec![0.0f64; dim]; dim];
    let mut atb = vec![0.0f64; dim];
    let mut regressor = vec![0.0f64; dim];
    let mut sum_y = 0.0;
    let mut sum_y2 = 0.0;
    for t in lags..n {
        regressor[0] = 1.0;
        for lag in 1..=lags {
            regressor[lag] = sq[t - lag];
        }
        let y = sq[t];
        sum_y += y;
        sum_y2 += y * y;
        for r in 0..dim {
            for c in r..dim {
                ata[r][c] += regressor[r] * regressor[c];
            }
            atb[r] += regressor[r] * y;
        }
    }
    for r in 1..dim {
        for c in 0..r {
            ata[r][c] = ata[c][r];
        }
    }

    let coeffs = solve_symmetric(&mut ata, &mut atb)?;

    // Residual sum of squares from a second pass keeps R^2 exact for the
    // perfect-fit case.
    let mut ssr = 0.0;
    for t in lags..n {
        let mut fit = coeffs[0];
        for lag in 1..=lags {
            fit += coeffs[lag] * sq[t - lag];
        }
        let e = sq[t] - fit;
        ssr += e * e;
    }
    let mean_y = sum_y / rows as f64;
    let sst = sum_y2 - rows as f64 * mean_y * mean_y;
    if sst <= 0.0 {
        return Err(StatsError::SingularRegression);
    }
    let r_squared = (1.0 - ssr / sst).clamp(0.0, 1.0);
    Ok(ArchLm {
        statistic: rows as f64 * r_squared,
        r_squared,
        lags,
        n_obs: rows,
    })
}

/// Gaussian elimination with partial pivoting; `a` and `b` are consumed.
#[allow(clippy::needless_range_loop)]
fn solve_symmetric(a: &mut [Vec<f64>], b: &mut [f64]) -> Result<Vec<f64>, StatsError> {
    let dim = b.len();
    let scale = a
        .iter()
        .flat_map(|row| row.iter())
        .fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return Err(StatsError::SingularRegression);
    }
    for col in 0..dim {
        let pivot = (col..dim)
            .max_by(|&r1, &r2| a[r1][col].abs().partial_cmp(&a[r2][col].abs()).unwrap())
            .unwrap();
        if a[pivot][col].abs() <= 1e-12 * scale {
            return Err(StatsError::SingularRegression);
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..dim {
            let f = a[row][col] / a[col][col];
            for c in col..dim {
                a[row][c] -= f * a[col][c];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; dim];
    for row in (0..dim).rev() {
        let mut acc = b[row];
        for c in row + 1..dim {
            acc -= a[row][c] * x[c];
        }
        x[row] = acc / a[row][row];
    }
    Ok(x)
}

/// Pairwise Pearson matrix with optional surrogate significance.
#[derive(Debug, Clone, PartialEq)]
pub struct PearsonMatrix {
    pub ids: Vec<String>,
    /// Symmetric, unit diagonal.
    pub coefficients: Vec<Vec<f64>>,
    /// Surrogate sigma per pair (zero diagonal) when requested.
    pub sigma_shuffle: Option<Vec<Vec<f64>>>,
    /// Per-pair significance flag: |C| > |mean| + band_k * sigma.
    pub significant: Option<Vec<Vec<bool>>>,
}

/// All-pairs Pearson coefficients. With a surrogate spec, each pair gets a
/// shuffle band; pair (i, j) uses the deterministic sub-seed
/// `substream(seed, i * k + j)` so the matrix is reproducible regardless of
/// evaluation order.
pub fn pearson_matrix(
    ids: &[String],
    series: &[Vec<f64>],
    surrogate: Option<&SurrogateSpec>,
) -> Result<PearsonMatrix, StatsError> {
    let k = series.len();
    if k < 2 {
        return Err(StatsError::TooFewSeries(k));
    }
    if ids.len() != k {
        return Err(StatsError::LengthMismatch {
            x: ids.len(),
            y: k,
        });
    }
    let len0 = series[0].len();
    for s in series {
        if s.len() != len0 {
            return Err(StatsError::LengthMismatch {
                x: len0,
                y: s.len(),
            });
        }
    }
    let mut coefficients = vec![vec![0.0; k]; k];
    let mut sigma = surrogate.map(|_| vec![vec![0.0; k]; k]);
    let mut significant = surrogate.map(|_| vec![vec![false; k]; k]);
    for i in 0..k {
        coefficients[i][i] = 1.0;
        if let Some(f) = significant.as_mut() {
            f[i][i] = true;
        }
        for j in i + 1..k {
            let c = pearson(&series[i], &series[j])?;
            coefficients[i][j] = c;
            coefficients[j][i] = c;
            if let Some(spec) = surrogate {
                let pair_spec = SurrogateSpec {
                    seed: substream_seed(spec.seed, (i * k + j) as u64),
                    ..*spec
                };
                let band =
                    significance_band(&series[i], &series[j], &pair_spec, |a, b| pearson(a, b).map(|v| vec![v]))?;
                let s = sigma.as_mut().unwrap();
                s[i][j] = band.sigma[0];
                s[j][i] = band.sigma[0];
                let f = significant.as_mut().unwrap();
                let flag = band.is_significant(0, c, spec.band_k);
                f[i][j] = flag;
                f[j][i] = flag;
            }
        }
    }
    Ok(PearsonMatrix {
        ids: ids.to_vec(),
        coefficients,
        sigma_shuffle: sigma,
        significant,
    })
}

/// Upper-tail 1% critical values of the chi-squared distribution, indexed by
/// degrees of freedom 1..=24.
pub fn chi_squared_crit_1pct(dof: usize) -> Option<f64> {
    const TABLE: [f64; 24] = [
        6.634897, 9.210340, 11.344867, 13.276704, 15.086272, 16.811894, 18.475307, 20.090235,
        21.665994, 23.209251, 24.724970, 26.216967, 27.688250, 29.141238, 30.577914, 31.999927,
        33.408664, 34.805306, 36.190869, 37.566235, 38.932173, 40.289360, 41.638398, 42.979820,
    ];
    if dof == 0 || dof > TABLE.len() {
        None
    } else {
        Some(TABLE[dof - 1])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth;

    #[test]
    fn pearson_identity_and_affine() {
        let x = vec![0.1, -0.4, 0.9, 2.0, -1.3];
        assert_eq!(pearson(&x, &x).unwrap(), 1.0);
        let y: Vec<f64> = x.iter().map(|v| -2.0 * v).collect();
        assert_eq!(pearson(&x, &y).unwrap(), -1.0);
    }

    #[test]
    fn pearson_hand_oracle() {
        // cov = 6, var_x = 5, var_y = 9 => r = 6 / sqrt(45) = 2 / sqrt(5).
        let x = [1.0, 2.0, 3.0, 4.0];
        let y = [1.0, 2.0, 2.0, 5.0];
        let r = pearson(&x, &y).unwrap();
        assert!((r - 0.8944271909999159).abs() < 1e-15, "{r}");
    }

    #[test]
    fn pearson_rejects_constant() {
        assert_eq!(
            pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]),
            Err(StatsError::ConstantInput)
        );
    }

    #[test]
    fn strength_labels() {
        assert_eq!(classify_strength(0.32).unwrap(), Strength::Medium);
        assert_eq!(classify_strength(0.0).unwrap(), Strength::Insignificant);
        assert_eq!(classify_strength(-0.6).unwrap(), Strength::Large);
        assert_eq!(classify_strength(0.1).unwrap(), Strength::Small);
        assert_eq!(classify_strength(0.3).unwrap(), Strength::Medium);
        assert_eq!(classify_strength(0.5).unwrap(), Strength::Large);
        assert_eq!(classify_strength(1.0).unwrap(), Strength::Large);
        assert_eq!(classify_strength(-1.0).unwrap(), Strength::Large);
        assert!(classify_strength(1.01).is_err());
        assert!(classify_strength(f64::NAN).is_err());
    }

    #[test]
    fn strength_monotone_in_magnitude() {
        let rank = |s: Strength| match s {
            Strength::Insignificant => 0,
            Strength::Small => 1,
            Strength::Medium => 2,
            Strength::Large => 3,
        };
        let mut prev = 0;
        for i in 0..=100 {
            let c = i as f64 / 100.0;
            let r = rank(classify_strength(c).unwrap());
            assert!(r >= prev);
            prev = r;
        }
    }

    #[test]
    fn shuffle_deterministic_and_multiset() {
        let x: Vec<f64> = (0..64).map(|i| i as f64).collect();
        let a = shuffle(&x, 9);
        let b = shuffle(&x, 9);
        assert_eq!(a, b);
        let mut sorted = a.clone();
        sorted.sort_by(|p, q| p.partial_cmp(q).unwrap());
        assert_eq!(sorted, x);
        assert_ne!(a, x);
    }

    #[test]
    fn shuffle_single_element() {
        assert_eq!(shuffle(&[5.0], 1), vec![5.0]);
    }

    #[test]
    fn shuffle_preserves_first_two_moments() {
        let x: Vec<f64> = (0..100).map(|i| (i as f64).sin() * 3.0 + 1.0).collect();
        let s = shuffle(&x, 17);
        let sum: f64 = x.iter().sum();
        let sum_s: f64 = s.iter().sum();
        let sq: f64 = x.iter().map(|v| v * v).sum();
        let sq_s: f64 = s.iter().map(|v| v * v).sum();
        // Same multiset, so the moment sums agree up to addition order.
        assert!((sum - sum_s).abs() < 1e-9);
        assert!((sq - sq_s).abs() < 1e-9);
    }

    #[test]
    fn band_of_constant_statistic_is_zero() {
        let x = vec![1.0, 2.0, 3.0, 4.0];
        let spec = SurrogateSpec::new(10, 1).unwrap();
        let band =
            significance_band(&x, &x, &spec, |_, _| Ok::<_, StatsError>(vec![0.0])).unwrap();
        assert_eq!(band.mean, vec![0.0]);
        assert_eq!(band.sigma, vec![0.0]);
    }

    #[test]
    fn band_mean_shrinks_on_iid_input() {
        // |mean| < 3 sigma / sqrt(n) for the Pearson statistic on an
        // independent pair.
        let (x, y) = synth::gaussian_pair(0.0, 4096, 2024).unwrap();
        let spec = SurrogateSpec::new(200, 7).unwrap();
        let band = significance_band(&x, &y, &spec, |a, b| pearson(a, b).map(|v| vec![v])).unwrap();
        assert!(
            band.mean[0].abs() < 3.0 * band.sigma[0] / libm::sqrt(200.0),
            "mean {} sigma {}",
            band.mean[0],
            band.sigma[0]
        );
    }

    #[test]
    fn band_sigma_scales_like_inverse_sqrt_t() {
        let t = 10_000usize;
        let (x, y) = synth::gaussian_pair(0.5, t, 99).unwrap();
        let spec = SurrogateSpec::new(100, 3).unwrap();
        let band = significance_band(&x, &y, &spec, |a, b| pearson(a, b).map(|v| vec![v])).unwrap();
        let expected = 1.0 / libm::sqrt(t as f64);
        assert!(
            band.sigma[0] > expected / 2.0 && band.sigma[0] < expected * 2.0,
            "sigma {} expected about {}",
            band.sigma[0],
            expected
        );
    }

    #[test]
    fn surrogate_first_only_keeps_second_series() {
        let x = vec![1.0, 2.0, 3.0, 4.0, 5.0];
        let y = vec![9.0, 8.0, 7.0, 6.0, 5.0];
        let spec = SurrogateSpec::new(2, 5).unwrap().with_mode(ShuffleMode::FirstOnly);
        let (_, sy) = surrogate_pair(&x, &y, &spec, 0);
        assert_eq!(sy, y);
    }

    #[test]
    fn jarque_bera_alternating_signs() {
        let x: Vec<f64> = (0..12).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let jb = jarque_bera(&x).unwrap();
        assert_eq!(jb.skewness, 0.0);
        assert_eq!(jb.kurtosis, 1.0);
        assert_eq!(jb.statistic, 2.0);
    }

    #[test]
    fn jarque_bera_zero_for_gaussian_moments() {
        // Symmetric multiset tuned so m4 = 3 * m2^2: eight +-1 values plus
        // +-c with c^2 = 6 + 5 * sqrt(2).
        let c = libm::sqrt(6.0 + 5.0 * libm::sqrt(2.0));
        let x = [1.0, -1.0, 1.0, -1.0, 1.0, -1.0, 1.0, -1.0, c, -c];
        let jb = jarque_bera(&x).unwrap();
        assert!(jb.statistic < 1e-12, "JB {}", jb.statistic);
    }

    #[test]
    fn jarque_bera_rejects_heavy_tails_not_gaussian() {
        let crit = chi_squared_crit_1pct(2).unwrap();
        let gaussian: Vec<f64> = {
            let mut rng = Rng::new(13);
            (0..100_000).map(|_| rng.normal()).collect()
        };
        assert!(jarque_bera(&gaussian).unwrap().statistic < crit);
        let heavy = synth::student_t(3.0, 100_000, 14).unwrap();
        assert!(jarque_bera(&heavy).unwrap().statistic > crit);
    }

    #[test]
    fn jarque_bera_input_guards() {
        assert!(jarque_bera(&[1.0, 2.0, 3.0]).is_err());
        assert_eq!(
            jarque_bera(&[2.0, 2.0, 2.0, 2.0]),
            Err(StatsError::ConstantInput)
        );
    }

    #[test]
    fn arch_lm_perfect_fit() {
        // x_t^2 follows an exact AR(1): v_t = 0.9 v_{t-1}.
        let n = 60;
        let mut v = 1.0f64;
        let x: Vec<f64> = (0..n)
            .map(|_| {
                let out = libm::sqrt(v);
                v *= 0.9;
                out
            })
            .collect();
        let fit = arch_lm(&x, 1).unwrap();
        assert!(fit.r_squared > 1.0 - 1e-9, "R^2 {}", fit.r_squared);
        assert!(
            (fit.statistic - (n - 1) as f64).abs() < 1e-6,
            "LM {}",
            fit.statistic
        );
    }

    #[test]
    fn arch_lm_gaussian_null_accepts() {
        let gaussian: Vec<f64> = {
            let mut rng = Rng::new(21);
            (0..100_000).map(|_| rng.normal()).collect()
        };
        let fit = arch_lm(&gaussian, 5).unwrap();
        assert!(fit.statistic < chi_squared_crit_1pct(5).unwrap(), "LM {}", fit.statistic);
    }

    #[test]
    fn arch_lm_rejects_volatility_clustering() {
        let x = synth::garch_like(0.1, 0.2, 0.7, 100_000, 22).unwrap();
        let fit = arch_lm(&x, 5).unwrap();
        assert!(fit.statistic > chi_squared_crit_1pct(5).unwrap(), "LM {}", fit.statistic);
    }

    #[test]
    fn arch_lm_singular_on_constant_square() {
        let x = vec![1.0, -1.0, 1.0, -1.0, 1.0, -1.0, 1.0, -1.0];
        assert_eq!(arch_lm(&x, 2), Err(StatsError::SingularRegression));
    }

    #[test]
    fn pearson_matrix_identical_series() {
        let ids = vec!["A".to_string(), "B".to_string()];
        let s = vec![vec![1.0, 2.0, 0.5, 3.0], vec![1.0, 2.0, 0.5, 3.0]];
        let m = pearson_matrix(&ids, &s, None).unwrap();
        assert_eq!(m.coefficients[0][1], 1.0);
        assert_eq!(m.coefficients[0][0], 1.0);
        assert_eq!(m.coefficients[1][1], 1.0);
    }

    #[test]
    fn pearson_matrix_matches_pairwise_oracle() {
        let mut rng = Rng::new(33);
        let series: Vec<Vec<f64>> = (0..3)
            .map(|_| (0..200).map(|_| rng.normal()).collect())
            .collect();
        let ids = vec!["A".to_string(), "B".to_string(), "C".to_string()];
        let m = pearson_matrix(&ids, &series, None).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let expected = if i == j {
                    1.0
                } else {
                    pearson(&series[i], &series[j]).unwrap()
                };
                assert_eq!(m.coefficients[i][j], expected);
            }
        }
    }

    #[test]
    fn pearson_matrix_rejects_mismatched_lengths() {
        let ids = vec!["A".to_string(), "B".to_string()];
        let s = vec![vec![1.0, 2.0, 3.0], vec![1.0, 2.0]];
        assert!(pearson_matrix(&ids, &s, None).is_err());
    }

    #[test]
    fn chi2_table_limits() {
        assert_eq!(chi_squared_crit_1pct(0), None);
        assert_eq!(chi_squared_crit_1pct(25), None);
        assert!((chi_squared_crit_1pct(2).unwrap() - 9.210340).abs() < 1e-6);
    }
}
