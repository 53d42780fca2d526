//! Brute-force reference implementation of the detrended cross-correlation
//! pipeline, kept deliberately naive and independent of the library path:
//! per-box cumulative sums by explicit loops, polynomial fits via normal
//! equations solved with Gaussian elimination, and direct power sums.
//!
//! The fit uses centered box indices; that keeps the small solve well
//! conditioned without changing the fitted polynomial space.

/// Residual of an order-`order` least-squares polynomial fit.
#[allow(clippy::needless_range_loop)]
fn polyfit_residual(profile: &[f64], order: usize) -> Vec<f64> {
    let n = profile.len();
    let dim = order + 1;
    let center = (n as f64 - 1.0) / 2.0;
    let mut ata = vec![vec![0.0f64; dim]; dim];
    let mut atb = vec![0.0f64; dim];
    for (i, &y) in profile.iter().enumerate() {
        let t = i as f64 - center;
        let mut powers = vec![1.0f64; dim];
        for k in 1..dim {
            powers[k] = powers[k - 1] * t;
        }
        for r in 0..dim {
            for c in 0..dim {
                ata[r][c] += powers[r] * powers[c];
            }
            atb[r] += powers[r] * y;
        }
    }
    for col in 0..dim {
        let pivot = (col..dim)
            .max_by(|&a, &b| ata[a][col].abs().partial_cmp(&ata[b][col].abs()).unwrap())
            .unwrap();
        ata.swap(col, pivot);
        atb.swap(col, pivot);
        for row in col + 1..dim {
            let f = ata[row][col] / ata[col][col];
            for c in col..dim {
                ata[row][c] -= f * ata[col][c];
            }
            atb[row] -= f * atb[col];
        }
    }
    let mut coeffs = vec![0.0f64; dim];
    for row in (0..dim).rev() {
        let mut acc = atb[row];
        for c in row + 1..dim {
            acc -= ata[row][c] * coeffs[c];
        }
        coeffs[row] = acc / ata[row][row];
    }
    profile
        .iter()
        .enumerate()
        .map(|(i, &y)| {
            let t = i as f64 - center;
            let mut fit = 0.0;
            for k in (0..dim).rev() {
                fit = fit * t + coeffs[k];
            }
            y - fit
        })
        .collect()
}

/// Fluctuation functions of one pair at one scale and one q.
pub fn fluctuations(x: &[f64], y: &[f64], scale: usize, order: usize, q: f64) -> (f64, f64, f64) {
    assert_eq!(x.len(), y.len());
    let t = x.len();
    let m_s = t / scale;
    let mut starts = Vec::with_capacity(2 * m_s);
    for v in 0..m_s {
        starts.push(v * scale);
    }
    for v in 0..m_s {
        starts.push(t - (v + 1) * scale);
    }

    let mut sum_xx = 0.0;
    let mut sum_yy = 0.0;
    let mut sum_xy = 0.0;
    for &start in &starts {
        let mut profile_x = Vec::with_capacity(scale);
        let mut profile_y = Vec::with_capacity(scale);
        let mut acc_x = 0.0;
        let mut acc_y = 0.0;
        for j in 0..scale {
            acc_x += x[start + j];
            acc_y += y[start + j];
            profile_x.push(acc_x);
            profile_y.push(acc_y);
        }
        let rx = polyfit_residual(&profile_x, order);
        let ry = polyfit_residual(&profile_y, order);
        let mut f2_xx = 0.0;
        let mut f2_yy = 0.0;
        let mut f2_xy = 0.0;
        for i in 0..scale {
            f2_xx += rx[i] * rx[i];
            f2_yy += ry[i] * ry[i];
            f2_xy += rx[i] * ry[i];
        }
        f2_xx /= scale as f64;
        f2_yy /= scale as f64;
        f2_xy /= scale as f64;
        sum_xx += f2_xx.powf(q / 2.0);
        sum_yy += f2_yy.powf(q / 2.0);
        sum_xy += f2_xy.signum() * f2_xy.abs().powf(q / 2.0);
    }
    let n_boxes = (2 * m_s) as f64;
    (sum_xx / n_boxes, sum_yy / n_boxes, sum_xy / n_boxes)
}

/// The q-dependent detrended correlation coefficient.
pub fn rho(x: &[f64], y: &[f64], scale: usize, order: usize, q: f64) -> f64 {
    let (fxx, fyy, fxy) = fluctuations(x, y, scale, order, q);
    fxy / (fxx * fyy).sqrt()
}
