//! Real-valued fields on a region of the lattice.
//!
//! A [`ScalarField`] carries one finite value per support cell. Evaluation
//! outside the support is an error, never a default: the energy of an
//! unbounded (here: undefined) field is not a number we silently invent.

use crate::error::{Error, Result};
use crate::grid::{Cell, Lattice, Region};

#[derive(Clone, Debug)]
pub struct ScalarField {
    support: Region,
    /// Full-raster storage; NaN outside the support.
    values: Vec<f64>,
}

impl PartialEq for ScalarField {
    /// Same support and equal values on it; the NaN padding outside the
    /// support is not compared.
    fn eq(&self, other: &ScalarField) -> bool {
        self.support == other.support
            && self
                .support
                .cells()
                .all(|c| self.values[self.lattice().raster(c)] == other.values[self.lattice().raster(c)])
    }
}

impl ScalarField {
    /// Field from a function of the cell center coordinates.
    pub fn from_fn(support: &Region, mut f: impl FnMut([f64; 2]) -> f64) -> Result<ScalarField> {
        let lat = support.lattice().clone();
        let mut values = vec![f64::NAN; lat.len()];
        for c in support.cells() {
            let v = f(lat.coord(c));
            values[lat.raster(c)] = check_finite(c, v)?;
        }
        Ok(ScalarField { support: support.clone(), values })
    }

    /// Field from values listed in raster order of `support.cells()`.
    pub fn from_values(support: &Region, vals: impl IntoIterator<Item = f64>) -> Result<ScalarField> {
        let lat = support.lattice().clone();
        let mut values = vec![f64::NAN; lat.len()];
        let mut it = vals.into_iter();
        for c in support.cells() {
            let v = it.next().ok_or_else(|| {
                Error::InvalidParameter("fewer values than support cells".into())
            })?;
            values[lat.raster(c)] = check_finite(c, v)?;
        }
        if it.next().is_some() {
            return Err(Error::InvalidParameter("more values than support cells".into()));
        }
        Ok(ScalarField { support: support.clone(), values })
    }

    pub fn constant(support: &Region, v: f64) -> Result<ScalarField> {
        ScalarField::from_fn(support, |_| v)
    }

    /// Indicator of `set` over `ambient` (1 inside, 0 outside).
    pub fn indicator(ambient: &Region, set: &Region) -> Result<ScalarField> {
        assert_eq!(ambient.lattice(), set.lattice(), "regions live on different lattices");
        ScalarField::from_fn(ambient, |_| 0.0).map(|mut f| {
            for c in set.cells() {
                if ambient.contains(c) {
                    let idx = ambient.lattice().raster(c);
                    f.values[idx] = 1.0;
                }
            }
            f
        })
    }

    pub fn lattice(&self) -> &Lattice {
        self.support.lattice()
    }

    pub fn support(&self) -> &Region {
        &self.support
    }

    pub fn value(&self, c: Cell) -> Result<f64> {
        if !self.support.contains(c) {
            return Err(Error::FieldUndefinedInWindow(c[0], c[1]));
        }
        Ok(self.values[self.lattice().raster(c)])
    }

    /// Raster-backed value access; NaN outside the support. Internal fast
    /// path for kernels that have already validated their windows.
    pub(crate) fn raw(&self) -> &[f64] {
        &self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = (Cell, f64)> + '_ {
        self.support.cells().map(move |c| (c, self.values[self.lattice().raster(c)]))
    }

    pub fn min(&self) -> f64 {
        self.iter().map(|(_, v)| v).fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.iter().map(|(_, v)| v).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Sorted distinct values of the field.
    pub fn levels(&self) -> Vec<f64> {
        let mut vals: Vec<f64> = self.iter().map(|(_, v)| v).collect();
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        vals.dedup();
        vals
    }

    /// Cellwise map over the support.
    pub fn map(&self, mut f: impl FnMut(f64) -> f64) -> Result<ScalarField> {
        let mut out = self.clone();
        for c in self.support.cells() {
            let idx = self.lattice().raster(c);
            out.values[idx] = check_finite(c, f(self.values[idx]))?;
        }
        Ok(out)
    }

    /// Cellwise combination of two fields on the same support.
    pub fn zip(&self, other: &ScalarField, mut f: impl FnMut(f64, f64) -> f64) -> Result<ScalarField> {
        if self.support != other.support {
            return Err(Error::InvalidParameter("fields have different supports".into()));
        }
        let mut out = self.clone();
        for c in self.support.cells() {
            let idx = self.lattice().raster(c);
            out.values[idx] = check_finite(c, f(self.values[idx], other.values[idx]))?;
        }
        Ok(out)
    }

    /// Overwrites the values on `region` (must be inside the support).
    pub fn with_values_on(&self, region: &Region, mut f: impl FnMut(Cell, f64) -> f64) -> Result<ScalarField> {
        if !region.is_subset_of(&self.support) {
            return Err(Error::InvalidParameter("region is not inside the field support".into()));
        }
        let mut out = self.clone();
        for c in region.cells() {
            let idx = self.lattice().raster(c);
            out.values[idx] = check_finite(c, f(c, self.values[idx]))?;
        }
        Ok(out)
    }

    /// Translation of the field (and its support) by a lattice vector.
    pub fn shift(&self, by: Cell) -> Result<ScalarField> {
        let lat = self.lattice().clone();
        let cells: Vec<Cell> = self.support.cells().map(|c| [c[0] + by[0], c[1] + by[1]]).collect();
        let support = Region::from_cells(&lat, cells)?;
        let mut values = vec![f64::NAN; lat.len()];
        for c in self.support.cells() {
            let t = [c[0] + by[0], c[1] + by[1]];
            values[lat.raster(t)] = self.values[lat.raster(c)];
        }
        Ok(ScalarField { support, values })
    }

    /// Restriction to a subregion of the support.
    pub fn restrict(&self, region: &Region) -> Result<ScalarField> {
        if !region.is_subset_of(&self.support) {
            return Err(Error::InvalidParameter("region is not inside the field support".into()));
        }
        let lat = self.lattice().clone();
        let mut values = vec![f64::NAN; lat.len()];
        for c in region.cells() {
            values[lat.raster(c)] = self.values[lat.raster(c)];
        }
        Ok(ScalarField { support: region.clone(), values })
    }
}

fn check_finite(c: Cell, v: f64) -> Result<f64> {
    if !v.is_finite() {
        return Err(Error::NonFiniteValue { i: c[0], j: c[1], value: v });
    }
    // Normalize -0.0 so that equal values are bit-identical; the fast and
    // naive extrema engines are compared bitwise.
    Ok(if v == 0.0 { 0.0 } else { v })
}
