//! Dirichlet problems for the p-oscillation energy.
//!
//! A problem fixes boundary data on the width-r collar `(Ω ⊕ B_r) \ Ω` and
//! minimizes `E_{r,p}(·, Ω)` over the free values on `Ω`. The main solver is
//! projected subgradient descent with an L∞ clamp at the boundary sup norm
//! and best-iterate tracking; a brute-force oracle gives ground truth on
//! tiny instances, and randomized perturbation audits certify (necessary
//! conditions for) minimality.

use std::time::{Duration, Instant};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::grid::{dilate, erode, Cell, Region};
use crate::oscillation::{energy, OscParams};

/// A Dirichlet problem: domain, boundary data on the collar, and the
/// oscillation parameters.
///
/// The data field must cover the collar `(Ω ⊕ B_r) \ Ω`; values it carries
/// on `Ω` itself, if any, only seed the initialization.
#[derive(Clone, Debug)]
pub struct DirichletProblem {
    omega: Region,
    data: ScalarField,
    params: OscParams,
    dilated: Region,
    collar: Region,
}

impl DirichletProblem {
    pub fn new(omega: Region, data: ScalarField, params: OscParams) -> Result<DirichletProblem> {
        let dilated = dilate(&omega, params.stencil())?;
        let collar = dilated.difference(&omega);
        if !collar.is_subset_of(data.support()) {
            for c in collar.cells() {
                if !data.support().contains(c) {
                    return Err(Error::FieldUndefinedInWindow(c[0], c[1]));
                }
            }
        }
        if !data.support().is_subset_of(&dilated) {
            return Err(Error::InvalidParameter(
                "boundary data must be supported inside Ω ⊕ B_r".into(),
            ));
        }
        Ok(DirichletProblem { omega, data, params, dilated, collar })
    }

    pub fn omega(&self) -> &Region {
        &self.omega
    }

    pub fn data(&self) -> &ScalarField {
        &self.data
    }

    pub fn params(&self) -> &OscParams {
        &self.params
    }

    /// `Ω ⊕ B_r`, the region a solution field lives on.
    pub fn dilated_domain(&self) -> &Region {
        &self.dilated
    }

    /// `(Ω ⊕ B_r) \ Ω`, where competitors must agree with the data.
    pub fn boundary_collar(&self) -> &Region {
        &self.collar
    }

    /// Sup norm of the data; the minimizer never needs to leave this box.
    pub fn data_sup_norm(&self) -> f64 {
        self.data.iter().map(|(_, v)| v.abs()).fold(0.0, f64::max)
    }

    /// Initial iterate: data on the collar, data seeds where present on `Ω`,
    /// otherwise the mean of the collar values.
    pub fn initial_field(&self) -> Result<ScalarField> {
        let collar_mean = if self.collar.is_empty() {
            0.0
        } else {
            let sum: f64 = self.collar.cells().map(|c| self.data.value(c).unwrap()).sum();
            sum / self.collar.count() as f64
        };
        ScalarField::from_fn(&self.dilated, |_| 0.0).and_then(|f| {
            f.with_values_on(&self.dilated, |c, _| {
                self.data.value(c).unwrap_or(collar_mean)
            })
        })
    }
}

/// Step schedule, iteration budget, and polish controls for the solver.
#[derive(Clone, Debug)]
pub struct SolverConfig {
    pub max_iters: usize,
    /// Initial step in value units; the step at iteration t is
    /// `step0 / sqrt(t + 1)`. `None` picks a tenth of the data value span.
    pub step0: Option<f64>,
    /// Stop when the best energy has improved by less than this over the
    /// last 200 iterations. Zero disables the stall check.
    pub tol: f64,
    pub seed: u64,
    /// L∞ clamp bound; defaults to the data sup norm.
    pub clamp: Option<f64>,
    /// For p = 1 on small instances, refine the best iterate by coordinate
    /// descent over the boundary value levels.
    pub polish: bool,
}

impl Default for SolverConfig {
    fn default() -> SolverConfig {
        SolverConfig { max_iters: 2000, step0: None, tol: 0.0, seed: 0, clamp: None, polish: true }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum Termination {
    MaxIters,
    GradientVanished,
    Stalled,
}

#[derive(Clone, Debug)]
pub struct SolveReport {
    /// The best iterate, on `Ω ⊕ B_r`.
    pub field: ScalarField,
    /// Best energy seen up to each iteration; nonincreasing.
    pub energy_trace: Vec<f64>,
    pub final_energy: f64,
    pub iterations: usize,
    pub termination: Termination,
    pub wall_time: Duration,
}

const STALL_PATIENCE: usize = 200;
const POLISH_MAX_FREE: usize = 64;
const POLISH_MAX_LEVELS: usize = 16;

/// Precomputed window structure for repeated energy evaluations on a fixed
/// problem: raster indices of every window of `Ω`.
struct Windows {
    p: f64,
    cell_measure: f64,
    /// Per Ω-cell: raster indices of the cells its window covers.
    windows: Vec<Vec<usize>>,
    /// Raster indices of the free (Ω) cells, in raster order.
    free: Vec<usize>,
}

impl Windows {
    fn build(prob: &DirichletProblem) -> Windows {
        let lat = prob.omega().lattice();
        let offsets = prob.params().stencil().offsets();
        let windows = prob
            .omega()
            .cells()
            .map(|c| {
                offsets
                    .iter()
                    .map(|off| lat.raster([c[0] + off[0], c[1] + off[1]]))
                    .collect()
            })
            .collect();
        let free = prob.omega().cells().map(|c| lat.raster(c)).collect();
        Windows {
            p: prob.params().p(),
            cell_measure: lat.h().powi(lat.dim() as i32),
            windows,
            free,
        }
    }

    fn energy(&self, raster: &[f64]) -> f64 {
        let mut sum = 0.0;
        for w in &self.windows {
            let mut mx = f64::NEG_INFINITY;
            let mut mn = f64::INFINITY;
            for &idx in w {
                let v = raster[idx];
                if v > mx {
                    mx = v;
                }
                if v < mn {
                    mn = v;
                }
            }
            let osc = mx - mn;
            sum += if self.p == 1.0 { osc } else { osc.powf(self.p) };
        }
        self.cell_measure * sum
    }

    /// Energy and a subgradient restricted to the free cells. Ties at the
    /// window max or min share the contribution equally.
    fn energy_and_subgradient(&self, raster: &[f64], free_mask: &[bool], grad: &mut [f64]) -> f64 {
        grad.iter_mut().for_each(|g| *g = 0.0);
        let mut sum = 0.0;
        for w in &self.windows {
            let mut mx = f64::NEG_INFINITY;
            let mut mn = f64::INFINITY;
            for &idx in w {
                let v = raster[idx];
                if v > mx {
                    mx = v;
                }
                if v < mn {
                    mn = v;
                }
            }
            let osc = mx - mn;
            sum += if self.p == 1.0 { osc } else { osc.powf(self.p) };
            if osc <= 0.0 {
                continue;
            }
            let coef = if self.p == 1.0 { 1.0 } else { self.p * osc.powf(self.p - 1.0) };
            let n_max = w.iter().filter(|&&idx| raster[idx] == mx).count();
            let n_min = w.iter().filter(|&&idx| raster[idx] == mn).count();
            let scale = coef * self.cell_measure;
            for &idx in w {
                if !free_mask[idx] {
                    continue;
                }
                let v = raster[idx];
                if v == mx {
                    grad[idx] += scale / n_max as f64;
                }
                if v == mn {
                    grad[idx] -= scale / n_min as f64;
                }
            }
        }
        self.cell_measure * sum
    }
}

/// Projected subgradient descent with best-iterate tracking.
///
/// Each iteration accumulates, per window, `p * osc^(p-1)` spread over the
/// tied argmax cells (positively) and argmin cells (negatively), restricted
/// to the free cells; steps against the normalized sum with schedule
/// `step0 / sqrt(t+1)`; clamps to the data sup norm box; and keeps the best
/// iterate by energy. For `p = 1` the best iterate is then snapped cellwise
/// to the nearest boundary level when that does not increase the energy, and
/// small instances are finished off by coordinate descent over the levels.
pub fn solve_subgradient(prob: &DirichletProblem, cfg: &SolverConfig) -> Result<SolveReport> {
    let start = Instant::now();
    let win = Windows::build(prob);
    let lat = prob.omega().lattice().clone();
    let init = prob.initial_field()?;
    let clamp = cfg.clamp.unwrap_or_else(|| prob.data_sup_norm());

    let mut raster: Vec<f64> = init.raw().to_vec();
    let mut free_mask = vec![false; lat.len()];
    for &idx in &win.free {
        free_mask[idx] = true;
        raster[idx] = raster[idx].clamp(-clamp, clamp);
    }

    let mut best = raster.clone();
    let mut best_energy = win.energy(&raster);
    let mut trace = Vec::with_capacity(cfg.max_iters);
    let mut termination = Termination::MaxIters;
    let mut iterations = 0;

    if win.free.is_empty() {
        termination = Termination::GradientVanished;
    } else {
        let span = {
            let vals: Vec<f64> = prob.data().iter().map(|(_, v)| v).collect();
            let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            (hi - lo).max(1e-3)
        };
        let step0 = cfg.step0.unwrap_or(0.1 * span);
        let mut grad = vec![0.0; lat.len()];
        let mut last_improvement_at = 0usize;
        let mut stall_reference = best_energy;

        for t in 0..cfg.max_iters {
            iterations = t + 1;
            let e = win.energy_and_subgradient(&raster, &free_mask, &mut grad);
            if e < best_energy {
                best_energy = e;
                best.copy_from_slice(&raster);
            }
            trace.push(best_energy);

            let ginf = win.free.iter().map(|&i| grad[i].abs()).fold(0.0, f64::max);
            if ginf == 0.0 {
                termination = Termination::GradientVanished;
                break;
            }
            if cfg.tol > 0.0 {
                if stall_reference - best_energy > cfg.tol {
                    stall_reference = best_energy;
                    last_improvement_at = t;
                } else if t - last_improvement_at >= STALL_PATIENCE {
                    termination = Termination::Stalled;
                    break;
                }
            }
            let step = step0 / ((t + 1) as f64).sqrt();
            for &idx in &win.free {
                raster[idx] = (raster[idx] - step * grad[idx] / ginf).clamp(-clamp, clamp);
            }
        }
    }

    if prob.params().p() == 1.0 {
        let levels = boundary_levels(prob);
        snap_to_levels(&win, &levels, &mut best, &mut best_energy);
        if cfg.polish && win.free.len() <= POLISH_MAX_FREE && levels.len() <= POLISH_MAX_LEVELS {
            polish_levels(&win, &levels, cfg.seed, &mut best, &mut best_energy);
        }
        trace.push(best_energy);
    }

    let field = field_from_raster(&lat, prob.dilated_domain(), &best)?;
    Ok(SolveReport {
        field,
        energy_trace: trace,
        final_energy: best_energy,
        iterations,
        termination,
        wall_time: start.elapsed(),
    })
}

fn boundary_levels(prob: &DirichletProblem) -> Vec<f64> {
    let mut levels: Vec<f64> = prob
        .boundary_collar()
        .cells()
        .map(|c| prob.data().value(c).unwrap())
        .collect();
    levels.sort_by(|a, b| a.partial_cmp(b).unwrap());
    levels.dedup();
    levels
}

/// Snaps each free cell to its nearest level if the snapped field is no
/// worse. For p = 1 a minimizer with values among the boundary levels always
/// exists, so this recovers the exact discrete optimum from a nearby iterate.
fn snap_to_levels(win: &Windows, levels: &[f64], best: &mut [f64], best_energy: &mut f64) {
    if levels.is_empty() {
        return;
    }
    let mut snapped = best.to_vec();
    for &idx in &win.free {
        let v = snapped[idx];
        let nearest = levels
            .iter()
            .cloned()
            .min_by(|a, b| (a - v).abs().partial_cmp(&(b - v).abs()).unwrap())
            .unwrap();
        snapped[idx] = nearest;
    }
    let e = win.energy(&snapped);
    if e <= *best_energy {
        *best_energy = e;
        best.copy_from_slice(&snapped);
    }
}

/// Coordinate descent over the level set, with horizontal cut moves, from
/// several deterministic and seeded starting points.
fn polish_levels(win: &Windows, levels: &[f64], seed: u64, best: &mut [f64], best_energy: &mut f64) {
    if levels.is_empty() || win.free.is_empty() {
        return;
    }
    let mut starts: Vec<Vec<f64>> = vec![best.to_vec()];
    for &level in levels {
        let mut s = best.to_vec();
        for &idx in &win.free {
            s[idx] = level;
        }
        starts.push(s);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..8 {
        let mut s = best.to_vec();
        for &idx in &win.free {
            s[idx] = *levels.choose(&mut rng).unwrap();
        }
        starts.push(s);
    }
    for mut s in starts {
        let mut e = win.energy(&s);
        let mut improved = true;
        let mut sweeps = 0;
        while improved && sweeps < 100 {
            improved = false;
            sweeps += 1;
            for &idx in &win.free {
                let original = s[idx];
                let mut cell_best = (e, original);
                for &level in levels {
                    if level == original {
                        continue;
                    }
                    s[idx] = level;
                    let trial = win.energy(&s);
                    if trial < cell_best.0 {
                        cell_best = (trial, level);
                    }
                }
                s[idx] = cell_best.1;
                if cell_best.0 < e {
                    e = cell_best.0;
                    improved = true;
                }
            }
            for &c in levels {
                for low in [true, false] {
                    let mut cut = s.clone();
                    for &idx in &win.free {
                        cut[idx] = if low { cut[idx].min(c) } else { cut[idx].max(c) };
                    }
                    let trial = win.energy(&cut);
                    if trial < e {
                        e = trial;
                        s = cut;
                        improved = true;
                    }
                }
            }
        }
        if e < *best_energy {
            *best_energy = e;
            best.copy_from_slice(&s);
        }
    }
}

fn field_from_raster(
    lat: &crate::grid::Lattice,
    support: &Region,
    raster: &[f64],
) -> Result<ScalarField> {
    ScalarField::from_fn(support, |_| 0.0)?
        .with_values_on(support, |c, _| raster[lat.raster(c)])
}

/// Exact minimum of the discrete energy over all assignments of the free
/// cells to the given levels, by exhaustive enumeration. Ties break toward
/// the lexicographically smallest assignment in raster order.
pub fn brute_force_oracle(
    prob: &DirichletProblem,
    levels: &[f64],
) -> Result<(ScalarField, f64)> {
    let n = prob.omega().count();
    let m = levels.len();
    if m == 0 {
        return Err(Error::InvalidParameter("oracle needs at least one level".into()));
    }
    if n > 16 || m > 5 {
        return Err(Error::OracleTooLarge(format!(
            "{n} free cells x {m} levels exceeds the 16-cell / 5-level enumeration bound"
        )));
    }
    let combos = (m as u128).pow(n as u32);
    if combos > 1 << 24 {
        return Err(Error::OracleTooLarge(format!("{combos} assignments exceed the 2^24 budget")));
    }
    let win = Windows::build(prob);
    let lat = prob.omega().lattice().clone();
    let mut raster = prob.initial_field()?.raw().to_vec();

    let mut digits = vec![0usize; n];
    for (&idx, &d) in win.free.iter().zip(&digits) {
        raster[idx] = levels[d];
    }
    let mut best_energy = win.energy(&raster);
    let mut best = raster.clone();
    'outer: loop {
        // odometer increment, last digit fastest: lexicographic ascending
        let mut pos = n;
        loop {
            if pos == 0 {
                break 'outer;
            }
            pos -= 1;
            if digits[pos] + 1 < m {
                digits[pos] += 1;
                raster[win.free[pos]] = levels[digits[pos]];
                break;
            }
            digits[pos] = 0;
            raster[win.free[pos]] = levels[0];
        }
        let e = win.energy(&raster);
        if e < best_energy {
            best_energy = e;
            best.copy_from_slice(&raster);
        }
    }
    let field = field_from_raster(&lat, prob.dilated_domain(), &best)?;
    Ok((field, best_energy))
}

/// The truncation `ϑ_u = min(u, u_o(b))` inside `Ω` for nondecreasing 1-D
/// boundary data; window oscillations never increase.
pub fn truncate_theta(u: &ScalarField, prob: &DirichletProblem) -> Result<ScalarField> {
    let cap = right_collar_floor(prob)?;
    u.with_values_on(prob.omega(), |_, v| v.min(cap))
}

/// The nondecreasing envelope `η_u`: running max from the left end of the
/// support. Requires `u` already truncated so that the collar survives.
pub fn monotone_envelope(u: &ScalarField, prob: &DirichletProblem) -> Result<ScalarField> {
    right_collar_floor(prob)?; // validates monotone data and dim
    if u.support() != prob.dilated_domain() {
        return Err(Error::InvalidParameter("envelope expects a field on Ω ⊕ B_r".into()));
    }
    let mut running = f64::NEG_INFINITY;
    let mut out = Vec::with_capacity(u.support().count());
    for (_, v) in u.iter() {
        running = running.max(v);
        out.push(running);
    }
    let env = ScalarField::from_values(u.support(), out)?;
    for c in prob.boundary_collar().cells() {
        if env.value(c)? != u.value(c)? {
            return Err(Error::InvalidParameter(
                "envelope would alter the boundary collar; truncate the field first".into(),
            ));
        }
    }
    Ok(env)
}

/// Validates 1-D nondecreasing boundary data and returns the value at the
/// left end of the right collar (the discrete `u_o(b)`).
fn right_collar_floor(prob: &DirichletProblem) -> Result<f64> {
    if prob.omega().lattice().dim() != 1 {
        return Err(Error::InvalidParameter("truncation and envelope are one-dimensional".into()));
    }
    let vals: Vec<(Cell, f64)> = prob
        .boundary_collar()
        .cells()
        .map(|c| (c, prob.data().value(c).unwrap()))
        .collect();
    if vals.windows(2).any(|w| w[0].1 > w[1].1) {
        return Err(Error::InvalidParameter("boundary data is not nondecreasing".into()));
    }
    let omega_max = prob.omega().cells().map(|c| c[0]).max().ok_or_else(|| {
        Error::InvalidParameter("empty domain".into())
    })?;
    vals.iter()
        .find(|(c, _)| c[0] > omega_max)
        .map(|&(_, v)| v)
        .ok_or_else(|| Error::InvalidParameter("no collar to the right of Ω".into()))
}

/// Randomized minimality audit per the width-r competitor class: samples
/// perturbations supported in `Ω ⊖ B_r` (dense noise, sparse spikes, and
/// horizontal cut moves) and returns the most negative energy change found.
/// A minimizer yields a value `>= -1e-9`.
pub fn minimizer_audit(
    u: &ScalarField,
    omega: &Region,
    params: &OscParams,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    let support = erode(omega, params.stencil())?;
    perturbation_audit(u, omega, params, &support, trials, seed)
}

/// Minimality audit with an explicit perturbation support. Used directly by
/// the rigidity checks, which widen the support to the full ball to show why
/// the collar must be excluded.
pub fn perturbation_audit(
    u: &ScalarField,
    omega: &Region,
    params: &OscParams,
    support: &Region,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    let base = energy(u, omega, params)?;
    if support.is_empty() || trials == 0 {
        return Ok(0.0);
    }
    let vmin = u.min();
    let vmax = u.max();
    let span = (vmax - vmin).max(1e-3);
    let cells: Vec<Cell> = support.cells().collect();

    let worst = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<f64> {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (t as u64).wrapping_mul(0x9E3779B97F4A7C15));
            let candidate = match t % 3 {
                0 => {
                    // dense Gaussian field at a random amplitude scale
                    let amp = span * 10f64.powf(rng.gen_range(-3.0..0.0));
                    let noise: Vec<f64> =
                        (0..cells.len()).map(|_| amp * rng.sample::<f64, _>(StandardNormal)).collect();
                    let mut i = 0;
                    u.with_values_on(support, |_, v| {
                        let out = v + noise[i];
                        i += 1;
                        out
                    })?
                }
                1 => {
                    let spikes = rng.gen_range(1..=3usize.min(cells.len()));
                    let mut bumps = std::collections::HashMap::new();
                    for _ in 0..spikes {
                        let c = *cells.choose(&mut rng).unwrap();
                        bumps.insert(c, rng.gen_range(-span..span));
                    }
                    u.with_values_on(support, |c, v| v + bumps.get(&c).copied().unwrap_or(0.0))?
                }
                _ => {
                    let c = rng.gen_range(vmin..=vmax);
                    if rng.gen_bool(0.5) {
                        u.with_values_on(support, |_, v| v.min(c))?
                    } else {
                        u.with_values_on(support, |_, v| v.max(c))?
                    }
                }
            };
            Ok(energy(&candidate, omega, params)? - base)
        })
        .try_reduce(|| 0.0, |a, b| Ok(a.min(b)))?;
    Ok(worst)
}

/// Audits `min(u, c)` and `max(u, c)`; for an audited minimizer both cuts
/// must pass as well.
pub fn cut_preservation_check(
    u: &ScalarField,
    omega: &Region,
    params: &OscParams,
    c: f64,
    trials: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    let low = minimizer_audit(&u.map(|v| v.min(c))?, omega, params, trials, seed)?;
    let high = minimizer_audit(&u.map(|v| v.max(c))?, omega, params, trials, seed.wrapping_add(1))?;
    Ok((low, high))
}
