//! Path simulation: exponential-Euler drift, Euler diffusion with full
//! truncation, exact compound-Poisson jumps for atomic measures.

mod report;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{AffineError, Result};
use crate::linalg;
use crate::model::{AdmissibleParameters, LevyMeasure};

pub use report::{
    empirical_cf, gof_from_batch, gof_report, moment_report, GofMode, GofReport, GofRow, MomentReport, MomentRow,
};

/// Jumps allowed in a single step before the run is rejected.
pub const MAX_JUMPS_PER_STEP: u32 = 64;

/// Recorded states of `n_paths` independent paths.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathBatch {
    pub x0: Vec<f64>,
    pub times: Vec<f64>,
    /// Path-major: `paths[(path * times.len() + k) * d + j]`.
    pub paths: Vec<f64>,
    pub n_paths: usize,
    pub dim: usize,
    pub seed: u64,
    pub dt: f64,
    pub steps: usize,
    pub nu_jumps: u64,
    pub mu_jumps: u64,
    pub warnings: Vec<String>,
}

impl PathBatch {
    pub fn state(&self, path: usize, k: usize) -> &[f64] {
        let off = (path * self.times.len() + k) * self.dim;
        &self.paths[off..off + self.dim]
    }

    /// Index of the recorded time closest to `t`; errors unless it matches.
    pub fn time_index(&self, t: f64) -> Result<usize> {
        let (k, dist) = self
            .times
            .iter()
            .enumerate()
            .map(|(k, s)| (k, (s - t).abs()))
            .fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
        if dist > 1e-9 * t.abs().max(1.0) {
            return Err(AffineError::InvalidInput(format!("t = {t} is not a recorded time")));
        }
        Ok(k)
    }

    /// Columnar CSV `t,path_id,x_1..x_d`.
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["t".to_string(), "path_id".to_string()];
        header.extend((1..=self.dim).map(|j| format!("x_{j}")));
        let io = |e: csv::Error| AffineError::InvalidInput(format!("csv output: {e}"));
        w.write_record(&header).map_err(io)?;
        for path in 0..self.n_paths {
            for (k, t) in self.times.iter().enumerate() {
                let mut row = vec![fmt_f64(*t), path.to_string()];
                row.extend(self.state(path, k).iter().map(|v| fmt_f64(*v)));
                w.write_record(&row).map_err(io)?;
            }
        }
        w.flush()
            .map_err(|e| AffineError::InvalidInput(format!("csv output: {e}")))
    }
}

/// 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

struct JumpTable {
    rate: f64,
    cumulative: Vec<f64>,
    locations: Vec<Vec<f64>>,
}

impl JumpTable {
    fn new(m: &LevyMeasure) -> Self {
        let mut acc = 0.0;
        let mut cumulative = Vec::with_capacity(m.atoms().len());
        let mut locations = Vec::with_capacity(m.atoms().len());
        for a in m.atoms().iter().filter(|a| a.weight > 0.0) {
            acc += a.weight;
            cumulative.push(acc);
            locations.push(a.location.clone());
        }
        JumpTable {
            rate: acc,
            cumulative,
            locations,
        }
    }

    fn pick<R: Rng>(&self, rng: &mut R) -> &[f64] {
        let target = rng.gen::<f64>() * self.rate;
        let k = self
            .cumulative
            .partition_point(|&c| c <= target)
            .min(self.locations.len() - 1);
        &self.locations[k]
    }
}

struct StepMap {
    h: f64,
    sqrt_h: f64,
    // row-major d x d
    phi: Vec<f64>,
    gamma: Vec<f64>,
}

struct Scheme {
    d: usize,
    m: usize,
    full: StepMap,
    last: StepMap,
    a2: Vec<f64>,
    alpha2: Vec<Vec<f64>>,
    constant_factor: Option<Vec<f64>>,
    nu: JumpTable,
    mu: Vec<JumpTable>,
}

fn step_map(beta: &DMatrix<f64>, b: &[f64], h: f64) -> StepMap {
    let d = beta.nrows();
    let mut aug = DMatrix::zeros(d + 1, d + 1);
    aug.view_mut((0, 0), (d, d)).copy_from(beta);
    for k in 0..d {
        aug[(k, d)] = b[k];
    }
    let e = linalg::expm(&aug, h);
    let mut phi = Vec::with_capacity(d * d);
    for r in 0..d {
        for c in 0..d {
            phi.push(e[(r, c)]);
        }
    }
    StepMap {
        h,
        sqrt_h: h.sqrt(),
        phi,
        gamma: (0..d).map(|r| e[(r, d)]).collect(),
    }
}

/// Lower-triangular `L` with `L L' = c` for symmetric PSD `c` (row-major);
/// zero pivots give zero columns.
fn psd_factor(c: &[f64], l: &mut [f64], d: usize) {
    if d == 1 {
        l[0] = c[0].max(0.0).sqrt();
        return;
    }
    l.iter_mut().for_each(|v| *v = 0.0);
    let scale = (0..d).map(|j| c[j * d + j].abs()).fold(0.0, f64::max);
    let floor = 1e-14 * scale;
    for j in 0..d {
        let mut s = c[j * d + j];
        for k in 0..j {
            s -= l[j * d + k] * l[j * d + k];
        }
        if s <= floor {
            continue;
        }
        let piv = s.sqrt();
        l[j * d + j] = piv;
        for r in j + 1..d {
            let mut v = c[r * d + j];
            for k in 0..j {
                v -= l[r * d + k] * l[j * d + k];
            }
            l[r * d + j] = v / piv;
        }
    }
}

fn row_major(a: &DMatrix<f64>, factor: f64) -> Vec<f64> {
    let d = a.nrows();
    let mut v = Vec::with_capacity(d * d);
    for r in 0..d {
        for c in 0..d {
            v.push(factor * a[(r, c)]);
        }
    }
    v
}

impl Scheme {
    fn new(p: &AdmissibleParameters, dt: f64, last_h: f64) -> Self {
        let (d, m) = (p.dims.d(), p.dims.m);
        // Jumps are simulated uncompensated, so their compensators move into the drift.
        let mut beta = p.beta.clone();
        for (i, mu) in p.mu.iter().enumerate() {
            for a in mu.atoms() {
                for k in 0..d {
                    beta[(k, i)] -= a.weight * a.location[k];
                }
            }
        }
        let mut b: Vec<f64> = p.b.iter().cloned().collect();
        for a in p.nu.atoms().iter().filter(|a| a.radius() <= 1.0) {
            for (bk, xk) in b.iter_mut().zip(&a.location).skip(m) {
                *bk -= a.weight * xk;
            }
        }
        let a2 = row_major(&p.a, 2.0);
        let alpha2: Vec<Vec<f64>> = p.alpha.iter().map(|al| row_major(al, 2.0)).collect();
        let constant_factor = if alpha2.iter().all(|al| al.iter().all(|v| *v == 0.0)) {
            let mut l = vec![0.0; d * d];
            psd_factor(&a2, &mut l, d);
            Some(l)
        } else {
            None
        };
        Scheme {
            d,
            m,
            full: step_map(&beta, &b, dt),
            last: step_map(&beta, &b, last_h),
            a2,
            alpha2,
            constant_factor,
            nu: JumpTable::new(&p.nu),
            mu: p.mu.iter().map(JumpTable::new).collect(),
        }
    }
}

struct Scratch {
    next: Vec<f64>,
    cov: Vec<f64>,
    l: Vec<f64>,
    z: Vec<f64>,
}

#[derive(Default, Clone, Copy)]
struct JumpCount {
    nu: u64,
    mu: u64,
}

fn poisson<R: Rng>(lambda: f64, rng: &mut R) -> u32 {
    if lambda <= 0.0 {
        return 0;
    }
    match Poisson::new(lambda) {
        Ok(dist) => {
            let k: f64 = dist.sample(rng);
            k.min(u32::MAX as f64) as u32
        }
        Err(_) => u32::MAX,
    }
}

impl Scheme {
    fn step<R: Rng>(
        &self,
        x: &mut [f64],
        map: &StepMap,
        s: &mut Scratch,
        rng: &mut R,
        counts: &mut JumpCount,
        t: f64,
    ) -> Result<()> {
        let d = self.d;
        for r in 0..d {
            let row = &map.phi[r * d..(r + 1) * d];
            s.next[r] = map.gamma[r] + row.iter().zip(x.iter()).map(|(a, b)| a * b).sum::<f64>();
        }
        let factor: Option<&[f64]> = match &self.constant_factor {
            Some(l) => Some(l.as_slice()),
            None => {
                s.cov.copy_from_slice(&self.a2);
                for (i, al) in self.alpha2.iter().enumerate() {
                    let xi = x[i].max(0.0);
                    if xi > 0.0 {
                        for (c, a) in s.cov.iter_mut().zip(al) {
                            *c += xi * a;
                        }
                    }
                }
                psd_factor(&s.cov, &mut s.l, d);
                Some(s.l.as_slice())
            }
        };
        if let Some(l) = factor {
            if l.iter().any(|v| *v != 0.0) {
                let sq = map.sqrt_h;
                for zj in s.z.iter_mut() {
                    *zj = rng.sample::<f64, _>(StandardNormal) * sq;
                }
                for r in 0..d {
                    let mut acc = 0.0;
                    for k in 0..=r {
                        acc += l[r * d + k] * s.z[k];
                    }
                    s.next[r] += acc;
                }
            }
        }
        let mut jumps = 0u32;
        if self.nu.rate > 0.0 {
            let k = poisson(self.nu.rate * map.h, rng);
            jumps = jumps.saturating_add(k);
            if jumps <= MAX_JUMPS_PER_STEP {
                for _ in 0..k {
                    let xi = self.nu.pick(rng);
                    s.next.iter_mut().zip(xi).for_each(|(a, b)| *a += b);
                }
                counts.nu += k as u64;
            }
        }
        for (i, table) in self.mu.iter().enumerate() {
            let xi_now = x[i].max(0.0);
            if table.rate == 0.0 || xi_now == 0.0 || jumps > MAX_JUMPS_PER_STEP {
                continue;
            }
            let k = poisson(xi_now * table.rate * map.h, rng);
            jumps = jumps.saturating_add(k);
            if jumps <= MAX_JUMPS_PER_STEP {
                for _ in 0..k {
                    let xi = table.pick(rng);
                    s.next.iter_mut().zip(xi).for_each(|(a, b)| *a += b);
                }
                counts.mu += k as u64;
            }
        }
        if jumps > MAX_JUMPS_PER_STEP {
            return Err(AffineError::SolverFailure {
                t_reached: t,
                reason: format!("more than {MAX_JUMPS_PER_STEP} jumps in one step; reduce dt"),
            });
        }
        for v in s.next[..self.m].iter_mut() {
            *v = v.max(0.0);
        }
        x.copy_from_slice(&s.next);
        Ok(())
    }
}

fn check_inputs(p: &AdmissibleParameters, x0: &[f64], dt: f64, horizon: f64) -> Result<()> {
    p.check_structure()?;
    if !p.is_atomic() {
        return Err(AffineError::Unsupported(
            "simulation needs finite-activity jump measures given by atoms".into(),
        ));
    }
    if x0.len() != p.dims.d() {
        return Err(AffineError::Dimension(format!(
            "x0 has {} entries, model has d = {}",
            x0.len(),
            p.dims.d()
        )));
    }
    if !p.dims.contains(x0) {
        return Err(AffineError::Domain("x0 lies outside D".into()));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(AffineError::InvalidInput(format!("dt must be positive, got {dt}")));
    }
    if !(horizon >= 0.0 && horizon.is_finite()) {
        return Err(AffineError::InvalidInput(format!(
            "horizon must be non-negative, got {horizon}"
        )));
    }
    Ok(())
}

/// Simulates on `[0, horizon]` and records every step.
pub fn simulate_paths(
    p: &AdmissibleParameters,
    x0: &[f64],
    horizon: f64,
    dt: f64,
    n_paths: usize,
    seed: u64,
) -> Result<PathBatch> {
    check_inputs(p, x0, dt, horizon)?;
    let steps = step_count(horizon, dt);
    let record: Vec<usize> = (0..=steps).collect();
    simulate(p, x0, horizon, dt, steps, &record, n_paths, seed)
}

/// Simulates up to the largest requested time and records only `times`
/// (each must be a multiple of `dt` or the horizon itself).
pub fn simulate_paths_at(
    p: &AdmissibleParameters,
    x0: &[f64],
    times: &[f64],
    dt: f64,
    n_paths: usize,
    seed: u64,
) -> Result<PathBatch> {
    let horizon = times.iter().cloned().fold(0.0, f64::max);
    check_inputs(p, x0, dt, horizon)?;
    let steps = step_count(horizon, dt);
    let mut record = vec![0usize];
    for &t in times {
        if !(t >= 0.0) {
            return Err(AffineError::InvalidInput(format!("negative record time {t}")));
        }
        let k = if t == horizon { steps } else { (t / dt).round() as usize };
        if (grid_time(k, steps, dt, horizon) - t).abs() > 1e-9 * t.max(1.0) {
            return Err(AffineError::InvalidInput(format!(
                "record time {t} is not on the dt grid"
            )));
        }
        record.push(k);
    }
    record.sort_unstable();
    record.dedup();
    simulate(p, x0, horizon, dt, steps, &record, n_paths, seed)
}

fn step_count(horizon: f64, dt: f64) -> usize {
    let n = horizon / dt;
    let r = n.round();
    if (n - r).abs() <= 1e-9 * n.max(1.0) {
        r as usize
    } else {
        n.ceil() as usize
    }
}

fn grid_time(k: usize, steps: usize, dt: f64, horizon: f64) -> f64 {
    if k == steps {
        horizon
    } else {
        k as f64 * dt
    }
}

#[allow(clippy::too_many_arguments)]
fn simulate(
    p: &AdmissibleParameters,
    x0: &[f64],
    horizon: f64,
    dt: f64,
    steps: usize,
    record: &[usize],
    n_paths: usize,
    seed: u64,
) -> Result<PathBatch> {
    let d = p.dims.d();
    let last_h = if steps == 0 {
        dt
    } else {
        horizon - (steps - 1) as f64 * dt
    };
    let scheme = Scheme::new(p, dt, last_h);
    let mut warnings = Vec::new();
    let beta_norm = p.beta.norm();
    if beta_norm > 0.0 && dt >= 1.0 / (2.0 * beta_norm) {
        warnings.push(format!("dt = {dt} >= 1/(2|beta|) = {}", 1.0 / (2.0 * beta_norm)));
    }
    let len = record.len();
    let mut paths = vec![0.0; n_paths * len * d];
    let counts: Vec<Result<JumpCount>> = paths
        .par_chunks_mut((len * d).max(1))
        .enumerate()
        .map(|(path, out)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(path as u64);
            let mut x = x0.to_vec();
            let mut s = Scratch {
                next: vec![0.0; d],
                cov: vec![0.0; d * d],
                l: vec![0.0; d * d],
                z: vec![0.0; d],
            };
            let mut counts = JumpCount::default();
            let mut slot = 0;
            for k in 0..=steps {
                if slot < len && record[slot] == k {
                    out[slot * d..(slot + 1) * d].copy_from_slice(&x);
                    slot += 1;
                }
                if k == steps {
                    break;
                }
                let map = if k + 1 == steps { &scheme.last } else { &scheme.full };
                scheme.step(&mut x, map, &mut s, &mut rng, &mut counts, k as f64 * dt)?;
            }
            Ok(counts)
        })
        .collect();
    let mut total = JumpCount::default();
    for c in counts {
        let c = c?;
        total.nu += c.nu;
        total.mu += c.mu;
    }
    Ok(PathBatch {
        x0: x0.to_vec(),
        times: record.iter().map(|&k| grid_time(k, steps, dt, horizon)).collect(),
        paths,
        n_paths,
        dim: d,
        seed,
        dt,
        steps,
        nu_jumps: total.nu,
        mu_jumps: total.mu,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Dimensions, ParametricTail, TailKind};

    fn cir() -> AdmissibleParameters {
        let mut p = AdmissibleParameters::zero(Dimensions::new(1, 0).unwrap());
        p.alpha[0][(0, 0)] = 1.0;
        p.beta[(0, 0)] = -1.0;
        p.b[0] = 1.0;
        p
    }

    #[test]
    fn deterministic_ou_is_exact() {
        let mut p = AdmissibleParameters::zero(Dimensions::new(0, 1).unwrap());
        p.beta[(0, 0)] = -1.0;
        let batch = simulate_paths(&p, &[1.0], 2.0, 0.01, 3, 7).unwrap();
        assert_eq!(batch.times.len(), 201);
        for path in 0..3 {
            for (k, t) in batch.times.iter().enumerate() {
                let x = batch.state(path, k)[0];
                assert!((x - (-t).exp()).abs() < 1e-13, "t = {t}: {x}");
            }
        }
        assert!(batch.warnings.is_empty());
    }

    #[test]
    fn psd_factor_handles_singular_matrices() {
        let c = [1.0, 1.0, 1.0, 1.0];
        let mut l = [0.0; 4];
        psd_factor(&c, &mut l, 2);
        assert_eq!(l, [1.0, 0.0, 1.0, 0.0]);
        let c = [4.0, 2.0, 2.0, 5.0];
        psd_factor(&c, &mut l, 2);
        assert_eq!(l, [2.0, 0.0, 1.0, 2.0]);
    }

    #[test]
    fn cir_mean_and_positivity() {
        let p = cir();
        let batch = simulate_paths_at(&p, &[3.0], &[2.0], 1e-2, 20_000, 11).unwrap();
        let k = batch.time_index(2.0).unwrap();
        let xs: Vec<f64> = (0..batch.n_paths).map(|i| batch.state(i, k)[0]).collect();
        assert!(xs.iter().all(|x| *x >= 0.0));
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let sd = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        let exact = 3.0 * (-2.0f64).exp() + 1.0 - (-2.0f64).exp();
        assert!((mean - exact).abs() < 3.0 * sd / n.sqrt(), "{mean} vs {exact}");
    }

    #[test]
    fn reproducible_and_jumps_counted() {
        let mut p = cir();
        p.nu = LevyMeasure::atomic(p.dims, vec![(vec![0.5], 2.0)]).unwrap();
        p.mu[0] = LevyMeasure::atomic(p.dims, vec![(vec![0.2], 1.0)]).unwrap();
        let a = simulate_paths(&p, &[1.0], 1.0, 0.01, 50, 3).unwrap();
        let b = simulate_paths(&p, &[1.0], 1.0, 0.01, 50, 3).unwrap();
        assert_eq!(a, b);
        assert!(a.nu_jumps > 0 && a.mu_jumps > 0);
        let c = simulate_paths(&p, &[1.0], 1.0, 0.01, 50, 4).unwrap();
        assert_ne!(a.paths, c.paths);
    }

    #[test]
    fn non_atomic_measure_is_unsupported() {
        let mut p = cir();
        let tail = ParametricTail::new(TailKind::PowerTail { index: 1.5 }, 1.0, vec![1.0]).unwrap();
        p.nu = LevyMeasure::new(p.dims, vec![], vec![tail]).unwrap();
        assert!(matches!(
            simulate_paths(&p, &[1.0], 1.0, 0.1, 1, 0),
            Err(AffineError::Unsupported(_))
        ));
    }

    #[test]
    fn coarse_step_warns() {
        let p = cir();
        let batch = simulate_paths(&p, &[1.0], 1.0, 0.5, 1, 0).unwrap();
        assert_eq!(batch.warnings.len(), 1);
    }

    #[test]
    fn fractional_last_step_reaches_horizon() {
        let mut p = AdmissibleParameters::zero(Dimensions::new(0, 1).unwrap());
        p.beta[(0, 0)] = -1.0;
        let batch = simulate_paths(&p, &[1.0], 1.05, 0.1, 1, 0).unwrap();
        assert_eq!(*batch.times.last().unwrap(), 1.05);
        assert!((batch.state(0, batch.times.len() - 1)[0] - (-1.05f64).exp()).abs() < 1e-13);
    }

    #[test]
    fn csv_layout() {
        let mut p = AdmissibleParameters::zero(Dimensions::new(1, 1).unwrap());
        p.beta[(0, 0)] = -1.0;
        let batch = simulate_paths(&p, &[1.0, 2.0], 0.2, 0.1, 2, 0).unwrap();
        let mut buf = Vec::new();
        batch.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "t,path_id,x_1,x_2");
        assert_eq!(lines.len(), 1 + 2 * 3);
        assert!(lines[1].starts_with("0.0000000000000000e0,0,1.0000000000000000e0,2.0000000000000000e0"));
    }
}
