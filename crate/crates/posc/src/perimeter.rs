//! Nonlocal Minkowski perimeter, level sets, the exact discrete coarea
//! identity, and the small-r comparison against discrete total variation.
//!
//! `Per_r(E, Ω) = (1/2r) * |band ∩ Ω|` where the band collects the cells
//! whose window meets both `E` and its complement. This equals
//! `(1/2r) * E_{r,1}(χ_E, Ω)` exactly: the oscillation of an indicator is 1
//! precisely on the band.

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::grid::{ball_stencil, dilate, dilate_clipped, Region};
use crate::oscillation::{energy, OscParams};

/// A set `E` together with the ambient region its indicator lives on.
#[derive(Clone, Debug, PartialEq)]
pub struct IndicatorSet {
    set: Region,
    ambient: Region,
}

impl IndicatorSet {
    pub fn new(set: Region, ambient: Region) -> Result<IndicatorSet> {
        if !set.is_subset_of(&ambient) {
            return Err(Error::InvalidParameter("indicator set must lie inside its ambient region".into()));
        }
        Ok(IndicatorSet { set, ambient })
    }

    pub fn set(&self) -> &Region {
        &self.set
    }

    pub fn ambient(&self) -> &Region {
        &self.ambient
    }

    /// The 0/1 field of the set over the ambient region.
    pub fn indicator_field(&self) -> Result<ScalarField> {
        ScalarField::indicator(&self.ambient, &self.set)
    }
}

fn check_omega_inside_ambient(e: &IndicatorSet, dilated_omega: &Region) -> Result<()> {
    if !dilated_omega.is_subset_of(e.ambient()) {
        for c in dilated_omega.cells() {
            if !e.ambient().contains(c) {
                return Err(Error::FieldUndefinedInWindow(c[0], c[1]));
            }
        }
    }
    Ok(())
}

/// Nonlocal perimeter `Per_r(E, Ω)`.
///
/// Computed from the band `dilate(E) ∩ dilate(ambient \ E)` rather than an
/// explicit discrete boundary; the band is exactly the set where the
/// indicator oscillates.
pub fn per_r(e: &IndicatorSet, omega: &Region, r: f64) -> Result<f64> {
    let lat = omega.lattice();
    let s = ball_stencil(r, lat.h(), lat.dim())?;
    let dilated = dilate(omega, &s)?;
    check_omega_inside_ambient(e, &dilated)?;
    let comp = e.ambient().difference(e.set());
    let band = dilate_clipped(e.set(), &s)
        .intersection(&dilate_clipped(&comp, &s))
        .intersection(omega);
    Ok(band.measure() / (2.0 * r))
}

/// The strict superlevel set `{u > s}` over the support of `u`.
pub fn level_set(u: &ScalarField, s: f64) -> IndicatorSet {
    let set = Region::from_predicate(u.support().lattice(), |c| {
        u.support().contains(c) && u.value(c).unwrap() > s
    });
    IndicatorSet { set, ambient: u.support().clone() }
}

/// Distinct-value cap for the coarea check. Any lattice field is technically
/// finite-valued; the cap keeps the threshold sum honest for fields that
/// were meant to be quantized.
pub const COAREA_LEVEL_LIMIT: usize = 1024;

/// Both sides of the generalized coarea formula:
/// `lhs = E_{r,1}(u, Ω)` and
/// `rhs = 2r * Σ_k (s_{k+1} - s_k) * Per_r({u > s_k}, Ω)`
/// over the sorted distinct values of `u`. The identity is exact discretely:
/// `max - min` equals the integral over thresholds of "the window straddles
/// s".
pub fn coarea_both_sides(u: &ScalarField, omega: &Region, r: f64) -> Result<(f64, f64)> {
    let lat = omega.lattice();
    let params = OscParams::new(r, 1.0, lat.h(), lat.dim())?;
    let lhs = energy(u, omega, &params)?;
    let levels = u.levels();
    if levels.len() > COAREA_LEVEL_LIMIT {
        return Err(Error::TooManyLevels { found: levels.len(), limit: COAREA_LEVEL_LIMIT });
    }
    let mut rhs = 0.0;
    for pair in levels.windows(2) {
        let gap = pair[1] - pair[0];
        let e = level_set(u, pair[0]);
        rhs += gap * per_r(&e, omega, r)?;
    }
    Ok((lhs, 2.0 * r * rhs))
}

/// The clamp-rescale transform
/// `1/2 + max(min(λ(u - s), 1/2), -1/2)`, valued in `[0, 1]`, pointwise
/// nondecreasing in `u`, and equal to the indicator of `{u > s}` once
/// `λ * gap > 1` for the smallest value gap around `s`.
pub fn clamp_rescale(u: &ScalarField, lambda: f64, s: f64) -> Result<ScalarField> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidParameter(format!("lambda must be positive, got {lambda}")));
    }
    u.map(|v| 0.5 + (lambda * (v - s)).clamp(-0.5, 0.5))
}

/// Discrete total variation: `h^dim * Σ |forward-difference gradient|` over
/// the cells of `Ω` whose forward neighbors lie in the support.
pub fn discrete_tv(u: &ScalarField, omega: &Region) -> Result<f64> {
    let lat = omega.lattice();
    if !omega.is_subset_of(u.support()) {
        return Err(Error::InvalidParameter("Ω is not inside the field support".into()));
    }
    let h = lat.h();
    let mut sum = 0.0;
    for c in omega.cells() {
        let v = u.value(c)?;
        let mut grad_sq = 0.0;
        let mut ok = true;
        for axis in 0..lat.dim() {
            let mut n = c;
            n[axis] += 1;
            match u.value(n) {
                Ok(w) => grad_sq += ((w - v) / h).powi(2),
                Err(_) => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            sum += grad_sq.sqrt();
        }
    }
    Ok(sum * h.powi(lat.dim() as i32))
}

/// One row of the small-r comparison table.
#[derive(Clone, Debug, serde::Serialize)]
pub struct GammaRow {
    pub r: f64,
    /// `E_{r,1}(u, Ω) / (2r)`.
    pub normalized_energy: f64,
    pub discrete_tv: f64,
}

/// Normalized energies `E_{r,1}/(2r)` for each radius, next to the discrete
/// total variation they approach as `r` shrinks (for fields monotone within
/// each window).
pub fn gamma_experiment(u: &ScalarField, omega: &Region, radii: &[f64]) -> Result<Vec<GammaRow>> {
    let lat = omega.lattice();
    let tv = discrete_tv(u, omega)?;
    let mut rows = Vec::with_capacity(radii.len());
    for &r in radii {
        let params = OscParams::new(r, 1.0, lat.h(), lat.dim())?;
        let e = energy(u, omega, &params)?;
        rows.push(GammaRow { r, normalized_energy: e / (2.0 * r), discrete_tv: tv });
    }
    Ok(rows)
}

/// Exhaustively audits `Per_r`-minimality of `E` in `Ω` against every
/// competitor that differs from `E` only on `free`. Returns the most
/// negative `Per_r(F, Ω) - Per_r(E, Ω)` found (0 for the identity
/// competitor); a minimal set yields a value `>= -1e-12`.
pub fn exhaustive_set_audit(e: &IndicatorSet, omega: &Region, r: f64, free: &Region) -> Result<f64> {
    let n = free.count();
    if n > 16 {
        return Err(Error::OracleTooLarge(format!(
            "{n} free cells would require 2^{n} competitors (limit 2^16)"
        )));
    }
    let base = per_r(e, omega, r)?;
    let free_cells: Vec<_> = free.cells().collect();
    let fixed = e.set().difference(free);
    let mut worst = 0.0f64;
    for mask in 0u32..(1u32 << n) {
        let chosen = free_cells
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, &c)| c);
        let candidate = fixed.union(&Region::from_cells(omega.lattice(), chosen)?);
        let f = IndicatorSet::new(candidate, e.ambient().clone())?;
        worst = worst.min(per_r(&f, omega, r)? - base);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Lattice;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn per_of_empty_and_full_vanishes() {
        let lat = Lattice::line(0.1, -30, 30).unwrap();
        let ambient = Region::full(&lat);
        let omega = Region::interval(&lat, -2.0, 2.0).unwrap();
        let empty = IndicatorSet::new(Region::empty(&lat), ambient.clone()).unwrap();
        let full = IndicatorSet::new(ambient.clone(), ambient.clone()).unwrap();
        assert_eq!(per_r(&empty, &omega, 0.5).unwrap(), 0.0);
        assert_eq!(per_r(&full, &omega, 0.5).unwrap(), 0.0);
    }

    #[test]
    fn halfspace_1d_perimeter_is_one() {
        let h = 0.005;
        let r = 0.25;
        let lat = Lattice::line(h, -300, 300).unwrap();
        let ambient = Region::full(&lat);
        let e = IndicatorSet::new(
            Region::from_predicate(&lat, |c| lat.coord(c)[0] > 0.0),
            ambient,
        )
        .unwrap();
        let omega = Region::interval(&lat, -1.0, 1.0).unwrap();
        let p = per_r(&e, &omega, r).unwrap();
        assert!((p - 1.0).abs() <= 2.0 * h / (2.0 * r), "p = {p}");
    }

    #[test]
    fn disk_perimeter_near_2pi_r() {
        let radius = 1.0;
        let h = 0.02;
        let r = 0.2;
        // Ω must contain the whole band, which reaches radius R + r = 1.2
        let lat = Lattice::grid(h, (-80, 80), (-80, 80)).unwrap();
        let ambient = Region::full(&lat);
        let e = IndicatorSet::new(Region::disk(&lat, 0.0, 0.0, radius).unwrap(), ambient).unwrap();
        let omega = Region::disk(&lat, 0.0, 0.0, 1.35).unwrap();
        let p = per_r(&e, &omega, r).unwrap();
        let exact = 2.0 * std::f64::consts::PI * radius;
        assert!((p - exact).abs() / exact < 0.02, "p = {p}");
    }

    #[test]
    fn per_agrees_with_energy_route() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let lat = Lattice::line(0.5, 0, 60).unwrap();
        let ambient = Region::full(&lat);
        let omega = Region::from_cells(&lat, (6..=54).map(|i| [i, 0])).unwrap();
        let r = 1.5;
        for _ in 0..10 {
            let set = Region::from_predicate(&lat, |_| rng.gen_bool(0.4));
            let e = IndicatorSet::new(set, ambient.clone()).unwrap();
            let band_route = per_r(&e, &omega, r).unwrap();
            let params = OscParams::new(r, 1.0, 0.5, 1).unwrap();
            let energy_route = energy(&e.indicator_field().unwrap(), &omega, &params).unwrap() / (2.0 * r);
            assert_eq!(band_route, energy_route);
        }
    }

    #[test]
    fn per_symmetric_under_complement() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let lat = Lattice::grid(1.0, (0, 19), (0, 19)).unwrap();
        let ambient = Region::full(&lat);
        let omega = Region::from_predicate(&lat, |c| (3..=16).contains(&c[0]) && (3..=16).contains(&c[1]));
        for _ in 0..5 {
            let set = Region::from_predicate(&lat, |_| rng.gen_bool(0.5));
            let e = IndicatorSet::new(set.clone(), ambient.clone()).unwrap();
            let ec = IndicatorSet::new(ambient.difference(&set), ambient.clone()).unwrap();
            assert_eq!(per_r(&e, &omega, 2.0).unwrap(), per_r(&ec, &omega, 2.0).unwrap());
        }
    }

    #[test]
    fn level_sets_nested_and_trivial_thresholds() {
        let lat = Lattice::line(1.0, 0, 8).unwrap();
        let u = ScalarField::from_values(
            &Region::full(&lat),
            [0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 2.0, 2.0, 2.0],
        )
        .unwrap();
        assert_eq!(level_set(&u, -1.0).set(), u.support());
        assert!(level_set(&u, 5.0).set().is_empty());
        let mid = level_set(&u, 0.5);
        assert_eq!(mid.set().count(), 6);
        let hi = level_set(&u, 1.5);
        assert!(hi.set().is_subset_of(mid.set()));
    }

    #[test]
    fn coarea_two_valued_by_hand() {
        // step of height 3: both sides equal gap * band measure
        let h = 0.1;
        let lat = Lattice::line(h, -40, 40).unwrap();
        let u = ScalarField::from_fn(&Region::full(&lat), |[x, _]| if x > 0.0 { 3.0 } else { 0.0 }).unwrap();
        let omega = Region::interval(&lat, -2.0, 2.0).unwrap();
        let (lhs, rhs) = coarea_both_sides(&u, &omega, 0.5).unwrap();
        assert!((lhs - rhs).abs() <= 1e-12 * lhs.max(1.0));
        // band is |x| <= r up to a cell: 10 cells: osc 3 each
        assert!((lhs - 3.0 * 1.0).abs() <= 3.0 * 2.0 * h);
    }

    #[test]
    fn coarea_exact_on_random_quantized_fields() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let lat = Lattice::line(0.2, 0, 120).unwrap();
        let omega = Region::from_cells(&lat, (10..=110).map(|i| [i, 0])).unwrap();
        let levels = [-1.0, -0.25, 0.0, 0.5, 2.0];
        for _ in 0..10 {
            let u = ScalarField::from_fn(&Region::full(&lat), |_| *levels.choose(&mut rng).unwrap()).unwrap();
            let (lhs, rhs) = coarea_both_sides(&u, &omega, 1.0).unwrap();
            assert!((lhs - rhs).abs() <= 1e-12 * lhs.max(1.0), "lhs {lhs} rhs {rhs}");
        }
    }

    #[test]
    fn coarea_constant_field_is_zero_zero() {
        let lat = Lattice::line(0.2, 0, 60).unwrap();
        let u = ScalarField::constant(&Region::full(&lat), 7.0).unwrap();
        let omega = Region::from_cells(&lat, (10..=50).map(|i| [i, 0])).unwrap();
        assert_eq!(coarea_both_sides(&u, &omega, 1.0).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn clamp_rescale_limits() {
        let lat = Lattice::line(1.0, 0, 9).unwrap();
        let u = ScalarField::from_fn(&Region::full(&lat), |[x, _]| x).unwrap();
        // gaps are 1, so lambda = 2 already recovers the indicator of {u > s}
        let s = 4.5;
        let v = clamp_rescale(&u, 2.0, s).unwrap();
        let ind = level_set(&u, s);
        for (c, val) in v.iter() {
            assert_eq!(val, if ind.set().contains(c) { 1.0 } else { 0.0 });
        }
        // u identically equal to the threshold maps to 1/2
        let w = ScalarField::constant(&Region::full(&lat), s).unwrap();
        assert!(clamp_rescale(&w, 10.0, s).unwrap().iter().all(|(_, v)| v == 0.5));
        // monotone input stays monotone
        let m = clamp_rescale(&u, 0.3, 3.0).unwrap();
        let vals: Vec<f64> = m.iter().map(|(_, v)| v).collect();
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn discrete_tv_basics() {
        let lat = Lattice::line(0.01, 0, 500).unwrap();
        let c = ScalarField::constant(&Region::full(&lat), 2.0).unwrap();
        let omega = Region::from_cells(&lat, (0..=400).map(|i| [i, 0])).unwrap();
        assert_eq!(discrete_tv(&c, &omega).unwrap(), 0.0);
        let lin = ScalarField::from_fn(&Region::full(&lat), |[x, _]| x).unwrap();
        let tv = discrete_tv(&lin, &omega).unwrap();
        assert!((tv - 4.0).abs() <= 0.02, "tv = {tv}"); // length 4.01, unit slope
    }

    #[test]
    fn discrete_tv_of_sine() {
        let h = 1e-3;
        let lat = Lattice::line(h, -1, 6284).unwrap();
        let u = ScalarField::from_fn(&Region::full(&lat), |[x, _]| x.sin()).unwrap();
        let omega = Region::interval(&lat, 0.0, 2.0 * std::f64::consts::PI).unwrap();
        let tv = discrete_tv(&u, &omega).unwrap();
        assert!((tv - 4.0).abs() / 4.0 < 0.01, "tv = {tv}");
    }

    #[test]
    fn gamma_linear_field_is_exact() {
        let h = 0.01;
        let lat = Lattice::line(h, -300, 300).unwrap();
        let u = ScalarField::from_fn(&Region::full(&lat), |[x, _]| x).unwrap();
        let omega = Region::interval(&lat, -1.0, 1.0).unwrap();
        let tv = discrete_tv(&u, &omega).unwrap();
        for row in gamma_experiment(&u, &omega, &[0.5, 0.2, 0.1]).unwrap() {
            // osc = 2r exactly for a linear field, so the ratio equals TV
            assert!((row.normalized_energy - tv).abs() / tv < 1e-2, "{row:?}");
        }
    }

    #[test]
    fn exhaustive_audit_flags_a_wasteful_set() {
        // an isolated cell far from the halfspace boundary adds band measure
        let lat = Lattice::line(1.0, -20, 20).unwrap();
        let ambient = Region::full(&lat);
        let omega = Region::from_cells(&lat, (-14..=14).map(|i| [i, 0])).unwrap();
        let good = Region::from_predicate(&lat, |c| c[0] > 0);
        let bad = good.union(&Region::from_cells(&lat, [[-10, 0]]).unwrap());
        let free = Region::from_cells(&lat, (-12..=-8).map(|i| [i, 0])).unwrap();
        let e_good = IndicatorSet::new(good, ambient.clone()).unwrap();
        let e_bad = IndicatorSet::new(bad, ambient.clone()).unwrap();
        assert!(exhaustive_set_audit(&e_good, &omega, 2.0, &free).unwrap() >= -1e-12);
        assert!(exhaustive_set_audit(&e_bad, &omega, 2.0, &free).unwrap() < -1e-12);
    }
}
