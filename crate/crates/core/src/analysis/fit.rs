//! Bounded Levenberg-Marquardt fits of decay and ZZ-oscillation models.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_ITERATIONS: usize = 200;
/// Upper bound on multi-start initializations of the oscillation fit.
pub const MAX_STARTS: usize = 20;

const T_BOUNDS: (f64, f64) = (1e-9, 1e4);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpFit {
    pub t_us: f64,
    pub amplitude: f64,
    pub offset: f64,
    /// One-sigma errors of `(T, A, C)`.
    pub std_errors: [f64; 3],
    pub residual_rms: f64,
    pub converged: bool,
    pub iterations: usize,
}

impl ExpFit {
    pub fn eval(&self, tau_us: f64) -> f64 {
        self.amplitude * (-tau_us / self.t_us).exp() + self.offset
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZzFit {
    pub t2_us: f64,
    /// Angular couplings in rad/us, largest first.
    pub omegas: Vec<f64>,
    /// One-sigma errors of `T2` followed by the couplings in `omegas` order.
    pub std_errors: Vec<f64>,
    pub residual_rms: f64,
    pub converged: bool,
    pub iterations: usize,
    pub starts: usize,
}

impl ZzFit {
    /// Couplings as Omega/2pi in MHz.
    pub fn omegas_2pi_mhz(&self) -> Vec<f64> {
        self.omegas.iter().map(|w| w / (2.0 * PI)).collect()
    }

    pub fn eval(&self, tau_us: f64) -> f64 {
        zz_model(self.t2_us, &self.omegas, tau_us)
    }
}

/// `(1 + exp(-tau/T2) * prod cos(2 Omega_i tau)) / 2`.
pub fn zz_model(t2_us: f64, omegas: &[f64], tau_us: f64) -> f64 {
    let osc: f64 = omegas.iter().map(|w| (2.0 * w * tau_us).cos()).product();
    0.5 * (1.0 + (-tau_us / t2_us).exp() * osc)
}

fn check_data(x: &[f64], y: &[f64], needed: usize) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            found: y.len(),
        });
    }
    if x.len() < needed {
        return Err(Error::TooFewPoints {
            needed,
            got: x.len(),
        });
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::Numerical("non-finite input data".into()));
    }
    Ok(())
}

/// `F = A exp(-tau/T) + C` with `T` in (0, 1e4], `A` in [0, 1.5], `C` in [-0.1, 1].
pub fn fit_exponential(taus: &[f64], fs: &[f64]) -> Result<ExpFit> {
    check_data(taus, fs, 3)?;
    let lower = [T_BOUNDS.0, 0.0, -0.1];
    let upper = [T_BOUNDS.1, 1.5, 1.0];
    let p0 = exp_initial_guess(taus, fs, &lower, &upper);
    let model = |p: &[f64], t: f64, grad: &mut [f64]| {
        let e = (-t / p[0]).exp();
        grad[0] = p[1] * e * t / (p[0] * p[0]);
        grad[1] = e;
        grad[2] = 1.0;
        p[1] * e + p[2]
    };
    let r = levenberg_marquardt(taus, fs, &p0, &lower, &upper, model)?;
    Ok(ExpFit {
        t_us: r.params[0],
        amplitude: r.params[1],
        offset: r.params[2],
        std_errors: [r.std_errors[0], r.std_errors[1], r.std_errors[2]],
        residual_rms: (r.cost / taus.len() as f64).sqrt(),
        converged: r.converged,
        iterations: r.iterations,
    })
}

/// Scans offsets and takes the log-linear fit with the smallest residual.
fn exp_initial_guess(x: &[f64], y: &[f64], lower: &[f64], upper: &[f64]) -> Vec<f64> {
    let ymin = y.iter().copied().fold(f64::INFINITY, f64::min);
    let ymax = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = x.iter().copied().fold(f64::NEG_INFINITY, f64::max) - x.iter().copied().fold(f64::INFINITY, f64::min);
    let mut best = vec![
        (span / 2.0).clamp(lower[0], upper[0]),
        (ymax - ymin).clamp(lower[1], upper[1]),
        ymin.clamp(lower[2], upper[2]),
    ];
    let mut best_cost = f64::INFINITY;
    let mut offsets: Vec<f64> = (0..=22).map(|k| -0.1 + 0.05 * k as f64).filter(|c| *c < ymin).collect();
    offsets.push(ymin - 1e-3);
    for c in offsets {
        let pts: Vec<(f64, f64)> = x
            .iter()
            .zip(y)
            .filter(|(_, &v)| v - c > 1e-6)
            .map(|(&t, &v)| (t, (v - c).ln()))
            .collect();
        if pts.len() < 2 {
            continue;
        }
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        if sxx <= 0.0 || sxy >= 0.0 {
            continue;
        }
        let slope = sxy / sxx;
        let p = [
            (-1.0 / slope).clamp(lower[0], upper[0]),
            (my - slope * mx).exp().clamp(lower[1], upper[1]),
            c.clamp(lower[2], upper[2]),
        ];
        let cost: f64 = x
            .iter()
            .zip(y)
            .map(|(&t, &v)| (v - p[1] * (-t / p[0]).exp() - p[2]).powi(2))
            .sum();
        if cost < best_cost {
            best_cost = cost;
            best = p.to_vec();
        }
    }
    best
}

/// Fits `F = (1 + exp(-tau/T2) prod_i cos(2 Omega_i tau)) / 2` with
/// `n_couplings` couplings. Starts are seeded from the peaks of a
/// non-uniform periodogram of `2F - 1`; the best of up to [`MAX_STARTS`]
/// local fits is returned. `n_couplings = 0` reduces to an exponential fit
/// of `2F - 1`.
pub fn fit_zz_oscillation(taus: &[f64], fs: &[f64], n_couplings: usize) -> Result<ZzFit> {
    if n_couplings == 0 {
        let g: Vec<f64> = fs.iter().map(|f| 2.0 * f - 1.0).collect();
        let e = fit_exponential(taus, &g)?;
        return Ok(ZzFit {
            t2_us: e.t_us,
            omegas: Vec::new(),
            std_errors: vec![e.std_errors[0]],
            residual_rms: e.residual_rms / 2.0,
            converged: e.converged,
            iterations: e.iterations,
            starts: 1,
        });
    }
    check_data(taus, fs, n_couplings + 2)?;
    let mut order: Vec<usize> = (0..taus.len()).collect();
    order.sort_by(|&a, &b| taus[a].total_cmp(&taus[b]));
    let x: Vec<f64> = order.iter().map(|&i| taus[i]).collect();
    let y: Vec<f64> = order.iter().map(|&i| fs[i]).collect();
    let span = x[x.len() - 1] - x[0];
    if !(span > 0.0) {
        return Err(Error::Numerical("tau grid has zero span".into()));
    }
    let min_dt = x
        .windows(2)
        .map(|w| w[1] - w[0])
        .filter(|d| *d > 0.0)
        .fold(f64::INFINITY, f64::min);
    let omega_cap = (PI / (2.0 * min_dt)).max(2.0 * PI * 5.0);

    let g: Vec<f64> = y.iter().map(|f| 2.0 * f - 1.0).collect();
    let peaks = periodogram_peaks(&x, &g, 2.0 * omega_cap, PI / (8.0 * span), 6);
    let starts = omega_starts(&x, &y, &peaks, n_couplings, omega_cap, span);

    let np = n_couplings + 1;
    let mut lower = vec![0.0; np];
    let mut upper = vec![omega_cap; np];
    lower[0] = T_BOUNDS.0;
    upper[0] = T_BOUNDS.1;
    let model = |p: &[f64], t: f64, grad: &mut [f64]| {
        let e = (-t / p[0]).exp();
        let cos: Vec<f64> = p[1..].iter().map(|w| (2.0 * w * t).cos()).collect();
        let prod: f64 = cos.iter().product();
        grad[0] = 0.5 * e * prod * t / (p[0] * p[0]);
        for k in 0..cos.len() {
            let others: f64 = cos.iter().enumerate().filter(|(i, _)| *i != k).map(|(_, c)| c).product();
            grad[k + 1] = -e * t * (2.0 * p[k + 1] * t).sin() * others;
        }
        0.5 * (1.0 + e * prod)
    };

    let mut best: Option<LmOutcome> = None;
    let mut iterations = 0;
    for omegas in &starts {
        let (t2, _) = t2_scan(&x, &y, omegas, span);
        let mut p0 = vec![t2];
        p0.extend_from_slice(omegas);
        let r = levenberg_marquardt(&x, &y, &p0, &lower, &upper, model)?;
        iterations += r.iterations;
        if best.as_ref().is_none_or(|b| r.cost < b.cost) {
            best = Some(r);
        }
    }
    let r = best.ok_or_else(|| Error::Numerical("no initial guesses".into()))?;
    let mut idx: Vec<usize> = (1..np).collect();
    idx.sort_by(|&a, &b| r.params[b].total_cmp(&r.params[a]));
    let mut std_errors = vec![r.std_errors[0]];
    std_errors.extend(idx.iter().map(|&i| r.std_errors[i]));
    Ok(ZzFit {
        t2_us: r.params[0],
        omegas: idx.iter().map(|&i| r.params[i]).collect(),
        std_errors,
        residual_rms: (r.cost / x.len() as f64).sqrt(),
        converged: r.converged,
        iterations,
        starts: starts.len(),
    })
}

/// Angular frequencies of the strongest local maxima of the weighted
/// periodogram `|sum w_k g_k exp(-i omega tau_k)|^2` on `[0, omega_max]`.
fn periodogram_peaks(x: &[f64], g: &[f64], omega_max: f64, d_omega: f64, count: usize) -> Vec<f64> {
    let n = x.len();
    let w: Vec<f64> = (0..n)
        .map(|k| {
            let lo = if k == 0 { x[0] } else { 0.5 * (x[k - 1] + x[k]) };
            let hi = if k + 1 == n { x[n - 1] } else { 0.5 * (x[k] + x[k + 1]) };
            (hi - lo).max(1e-12)
        })
        .collect();
    let m = ((omega_max / d_omega).ceil() as usize).clamp(16, 200_000);
    let power: Vec<f64> = (0..=m)
        .map(|j| {
            let om = j as f64 * d_omega;
            let (mut re, mut im) = (0.0, 0.0);
            for k in 0..n {
                let (s, c) = (om * x[k]).sin_cos();
                re += w[k] * g[k] * c;
                im -= w[k] * g[k] * s;
            }
            re * re + im * im
        })
        .collect();
    let mut peaks: Vec<(f64, f64)> = (0..=m)
        .filter(|&j| {
            let left = if j == 0 { f64::NEG_INFINITY } else { power[j - 1] };
            let right = if j == m { f64::NEG_INFINITY } else { power[j + 1] };
            power[j] >= left && power[j] > right
        })
        .map(|j| (j as f64 * d_omega, power[j]))
        .collect();
    peaks.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.total_cmp(&b.0)));
    peaks.truncate(count);
    peaks.into_iter().map(|p| p.0).collect()
}

/// Candidate coupling vectors. A product of cosines at `2 Omega_i` shows
/// lines at `2 |sum of +-Omega_i|`, so single peaks `p` suggest `p / 2` and
/// pairs `p, q` suggest `(p + q) / 4` and `|p - q| / 4`. Every multiset of
/// `n` candidate values is scored by its residual after a T2 scan and the
/// best [`MAX_STARTS`] are kept.
fn omega_starts(x: &[f64], y: &[f64], peaks: &[f64], n: usize, cap: f64, span: f64) -> Vec<Vec<f64>> {
    let mut values: Vec<f64> = peaks.iter().map(|p| p / 2.0).collect();
    for i in 0..peaks.len() {
        for j in i + 1..peaks.len() {
            values.push((peaks[i] + peaks[j]) / 4.0);
            values.push((peaks[i] - peaks[j]).abs() / 4.0);
        }
    }
    let mut uniq: Vec<f64> = Vec::new();
    for v in values.into_iter().map(|v| v.clamp(0.0, cap)) {
        if !uniq.iter().any(|u| (u - v).abs() <= 1e-6 * (1.0 + v)) {
            uniq.push(v);
        }
    }
    if uniq.is_empty() {
        uniq = (1..=n).map(|k| 0.1 * k as f64).collect();
    }
    while combinations_with_replacement(uniq.len(), n) > MAX_COMBINATIONS && uniq.len() > 1 {
        uniq.pop();
    }

    let mut scored: Vec<(f64, Vec<f64>)> = Vec::new();
    let mut idx = vec![0usize; n];
    loop {
        let v: Vec<f64> = idx.iter().map(|&i| uniq[i]).collect();
        scored.push((t2_scan(x, y, &v, span).1, v));
        // Next non-decreasing index tuple.
        let Some(k) = (0..n).rev().find(|&k| idx[k] + 1 < uniq.len()) else {
            break;
        };
        idx[k] += 1;
        for m in k + 1..n {
            idx[m] = idx[k];
        }
    }
    scored.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<Vec<f64>> = Vec::new();
    for (_, v) in scored {
        push_start(&mut out, v, n, cap);
        if out.len() >= MAX_STARTS {
            break;
        }
    }
    out
}

const MAX_COMBINATIONS: usize = 20_000;

fn push_start(out: &mut Vec<Vec<f64>>, mut v: Vec<f64>, n: usize, cap: f64) {
    if v.len() != n || out.len() >= MAX_STARTS {
        return;
    }
    v.iter_mut().for_each(|w| *w = w.clamp(0.0, cap));
    v.sort_by(|a, b| b.total_cmp(a));
    let dup = out
        .iter()
        .any(|o| o.iter().zip(&v).all(|(a, b)| (a - b).abs() <= 1e-6 * (1.0 + a.abs())));
    if !dup {
        out.push(v);
    }
}

fn combinations_with_replacement(k: usize, n: usize) -> usize {
    (0..n).fold(1usize, |acc, i| acc.saturating_mul(k + i) / (i + 1))
}

/// T2 on a log grid minimizing the residual with the couplings held fixed,
/// and that residual.
fn t2_scan(x: &[f64], y: &[f64], omegas: &[f64], span: f64) -> (f64, f64) {
    let lo = (span / 20.0).max(T_BOUNDS.0);
    let hi = (span * 20.0).min(T_BOUNDS.1);
    (0..=24)
        .map(|k| lo * (hi / lo).powf(k as f64 / 24.0))
        .map(|t2| {
            let c: f64 = x.iter().zip(y).map(|(&t, &f)| (f - zz_model(t2, omegas, t)).powi(2)).sum();
            (t2, c)
        })
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap_or((span, f64::INFINITY))
}

struct LmOutcome {
    params: Vec<f64>,
    std_errors: Vec<f64>,
    cost: f64,
    iterations: usize,
    converged: bool,
}

fn levenberg_marquardt<M>(
    x: &[f64],
    y: &[f64],
    p0: &[f64],
    lower: &[f64],
    upper: &[f64],
    model: M,
) -> Result<LmOutcome>
where
    M: Fn(&[f64], f64, &mut [f64]) -> f64,
{
    let np = p0.len();
    let m = x.len();
    let clamp = |p: &mut [f64]| {
        for i in 0..np {
            p[i] = p[i].clamp(lower[i], upper[i]);
        }
    };
    let eval = |p: &[f64], jac: &mut Vec<f64>, res: &mut Vec<f64>| -> f64 {
        jac.resize(m * np, 0.0);
        res.resize(m, 0.0);
        let mut cost = 0.0;
        for k in 0..m {
            let f = model(p, x[k], &mut jac[k * np..(k + 1) * np]);
            res[k] = y[k] - f;
            cost += res[k] * res[k];
        }
        cost
    };
    let normal = |jac: &[f64], res: &[f64]| {
        let mut a = vec![0.0; np * np];
        let mut g = vec![0.0; np];
        for k in 0..m {
            let row = &jac[k * np..(k + 1) * np];
            for i in 0..np {
                g[i] += row[i] * res[k];
                for j in 0..np {
                    a[i * np + j] += row[i] * row[j];
                }
            }
        }
        (a, g)
    };

    let mut p = p0.to_vec();
    clamp(&mut p);
    let (mut jac, mut res) = (Vec::new(), Vec::new());
    let mut cost = eval(&p, &mut jac, &mut res);
    if !cost.is_finite() {
        return Err(Error::Numerical("model is not finite at the initial guess".into()));
    }
    let mut lambda = 1e-3;
    let mut converged = false;
    let mut iterations = 0;
    let (mut jac_new, mut res_new) = (Vec::new(), Vec::new());
    'outer: while iterations < MAX_ITERATIONS {
        iterations += 1;
        let (a, g) = normal(&jac, &res);
        loop {
            let mut damped = a.clone();
            for i in 0..np {
                damped[i * np + i] += lambda * a[i * np + i].max(1e-12);
            }
            let Some(delta) = solve(&damped, &g, np) else {
                lambda *= 10.0;
                if lambda > 1e16 {
                    converged = true;
                    break 'outer;
                }
                continue;
            };
            let mut trial: Vec<f64> = p.iter().zip(&delta).map(|(a, b)| a + b).collect();
            clamp(&mut trial);
            let c = eval(&trial, &mut jac_new, &mut res_new);
            if c.is_finite() && c < cost {
                let rel = (cost - c) / cost.max(f64::MIN_POSITIVE);
                let small_step = trial
                    .iter()
                    .zip(&p)
                    .all(|(a, b)| (a - b).abs() <= 1e-10 * (b.abs() + 1e-10));
                p = trial;
                cost = c;
                std::mem::swap(&mut jac, &mut jac_new);
                std::mem::swap(&mut res, &mut res_new);
                lambda = (lambda / 10.0).max(1e-12);
                if rel < 1e-12 || small_step || cost == 0.0 {
                    converged = true;
                    break 'outer;
                }
                break;
            }
            lambda *= 10.0;
            if lambda > 1e16 {
                converged = true;
                break 'outer;
            }
        }
    }
    if p.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("fit diverged".into()));
    }
    let (a, _) = normal(&jac, &res);
    let dof = m.saturating_sub(np).max(1) as f64;
    let s2 = cost / dof;
    let std_errors = (0..np)
        .map(|i| {
            let mut e = vec![0.0; np];
            e[i] = 1.0;
            solve(&a, &e, np).map_or(f64::INFINITY, |col| (s2 * col[i]).max(0.0).sqrt())
        })
        .collect();
    Ok(LmOutcome {
        params: p,
        std_errors,
        cost,
        iterations,
        converged,
    })
}

/// Gaussian elimination with partial pivoting; `None` if singular.
fn solve(a: &[f64], b: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut m = a.to_vec();
    let mut v = b.to_vec();
    let scale = m.iter().fold(0.0f64, |s, x| s.max(x.abs())).max(f64::MIN_POSITIVE);
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| m[i * n + col].abs().total_cmp(&m[j * n + col].abs()))?;
        if m[piv * n + col].abs() <= 1e-14 * scale {
            return None;
        }
        if piv != col {
            for k in 0..n {
                m.swap(piv * n + k, col * n + k);
            }
            v.swap(piv, col);
        }
        for r in col + 1..n {
            let f = m[r * n + col] / m[col * n + col];
            for k in col..n {
                m[r * n + k] -= f * m[col * n + k];
            }
            v[r] -= f * v[col];
        }
    }
    let mut out = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| m[r * n + k] * out[k]).sum();
        out[r] = (v[r] - s) / m[r * n + r];
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid(n: usize, max: f64) -> Vec<f64> {
        (0..n).map(|k| max * k as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn exponential_exact_data() {
        let x = grid(30, 150.0);
        let y: Vec<f64> = x.iter().map(|t| 0.93 * (-t / 47.0).exp() + 0.04).collect();
        let f = fit_exponential(&x, &y).unwrap();
        assert!(f.converged);
        assert!((f.t_us - 47.0).abs() < 1e-6, "{f:?}");
        assert!((f.amplitude - 0.93).abs() < 1e-8);
        assert!((f.offset - 0.04).abs() < 1e-8);
    }

    #[test]
    fn exponential_rejects_short_data() {
        assert!(matches!(
            fit_exponential(&[1.0, 2.0], &[0.5, 0.4]),
            Err(Error::TooFewPoints { needed: 3, got: 2 })
        ));
        assert!(fit_exponential(&[1.0, 2.0, 3.0], &[0.5, 0.4]).is_err());
    }

    #[test]
    fn oscillation_one_and_two_couplings() {
        let x: Vec<f64> = (0..60).map(|k| 4.0 * ((1.0f64 + 25.0).powf(k as f64 / 59.0) - 1.0)).collect();
        let w1 = 2.0 * PI * 0.155;
        let y: Vec<f64> = x.iter().map(|&t| zz_model(204.0, &[w1], t)).collect();
        let f = fit_zz_oscillation(&x, &y, 1).unwrap();
        assert!((f.omegas[0] - w1).abs() < 1e-6, "{f:?}");
        assert!((f.t2_us - 204.0).abs() < 1e-3);

        let w2 = 2.0 * PI * 0.081;
        let y: Vec<f64> = x.iter().map(|&t| zz_model(94.0, &[w2, w1], t)).collect();
        let f = fit_zz_oscillation(&x, &y, 2).unwrap();
        assert!((f.omegas[0] - w1).abs() < 1e-5 && (f.omegas[1] - w2).abs() < 1e-5, "{f:?}");
        assert!((f.t2_us - 94.0).abs() < 1e-2);
    }

    #[test]
    fn zero_couplings_fit_t2() {
        let x = grid(20, 200.0);
        let y: Vec<f64> = x.iter().map(|&t| zz_model(80.0, &[], t)).collect();
        let f = fit_zz_oscillation(&x, &y, 0).unwrap();
        assert!((f.t2_us - 80.0).abs() < 1e-4);
        assert!(f.omegas.is_empty());
    }

    #[test]
    fn solver_handles_pivoting() {
        let a = [0.0, 1.0, 2.0, 3.0];
        let x = solve(&a, &[1.0, 8.0], 2).unwrap();
        assert!((x[0] - 2.5).abs() < 1e-12 && (x[1] - 1.0).abs() < 1e-12);
        assert!(solve(&[1.0, 2.0, 2.0, 4.0], &[1.0, 1.0], 2).is_none());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn exponential_recovers_noiseless_parameters(t in 5.0f64..300.0, a in 0.3f64..1.0, c in 0.0f64..0.3) {
            let x = grid(25, 3.0 * t);
            let y: Vec<f64> = x.iter().map(|s| a * (-s / t).exp() + c).collect();
            let f = fit_exponential(&x, &y).unwrap();
            prop_assert!((f.t_us - t).abs() / t < 1e-4);
            prop_assert!(f.t_us > 0.0 && (0.0..=1.5).contains(&f.amplitude));
        }
    }
}
