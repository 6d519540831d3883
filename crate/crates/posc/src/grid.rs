//! Lattice geometry, finite cell regions, and ball-based morphology.
//!
//! Everything downstream lives on a [`Lattice`]: a regular grid in one or two
//! dimensions with spacing `h` and finite index extents. A [`Region`] is a set
//! of lattice cells (stored as a bitmask over the extents), and a
//! [`BallStencil`] is the discrete closed Euclidean ball used both as the
//! oscillation window and as the morphological structuring element.
//!
//! The discrete ball uses `k = round(r / h)` cells; all discrete restatements
//! of continuum identities are phrased in terms of `k`.

use crate::error::{Error, Result};

/// A lattice cell index. One-dimensional lattices use `[i, 0]`.
pub type Cell = [i64; 2];

/// Regular grid: dimension (1 or 2), cell spacing `h`, and inclusive
/// per-axis index extents. Cell centers sit at `index * h` per axis.
#[derive(Clone, Debug, PartialEq)]
pub struct Lattice {
    dim: usize,
    h: f64,
    extents: [(i64, i64); 2],
}

impl Lattice {
    /// One-dimensional lattice over the inclusive index range `lo..=hi`.
    pub fn line(h: f64, lo: i64, hi: i64) -> Result<Lattice> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::InvalidParameter(format!("cell spacing must be positive, got {h}")));
        }
        if lo > hi {
            return Err(Error::InvalidParameter(format!("empty extents {lo}..={hi}")));
        }
        Ok(Lattice { dim: 1, h, extents: [(lo, hi), (0, 0)] })
    }

    /// Two-dimensional lattice over the inclusive index ranges.
    pub fn grid(h: f64, rows: (i64, i64), cols: (i64, i64)) -> Result<Lattice> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::InvalidParameter(format!("cell spacing must be positive, got {h}")));
        }
        if rows.0 > rows.1 || cols.0 > cols.1 {
            return Err(Error::InvalidParameter(format!("empty extents {rows:?} x {cols:?}")));
        }
        Ok(Lattice { dim: 2, h, extents: [rows, cols] })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn extents(&self) -> [(i64, i64); 2] {
        self.extents
    }

    /// Number of cells in the extents.
    pub fn len(&self) -> usize {
        let (w0, w1) = self.widths();
        w0 * w1
    }

    pub fn is_empty(&self) -> bool {
        false // extents are validated nonempty
    }

    fn widths(&self) -> (usize, usize) {
        (
            (self.extents[0].1 - self.extents[0].0 + 1) as usize,
            (self.extents[1].1 - self.extents[1].0 + 1) as usize,
        )
    }

    pub fn contains(&self, c: Cell) -> bool {
        c[0] >= self.extents[0].0
            && c[0] <= self.extents[0].1
            && c[1] >= self.extents[1].0
            && c[1] <= self.extents[1].1
    }

    /// Raster index of a cell inside the extents.
    pub(crate) fn raster(&self, c: Cell) -> usize {
        debug_assert!(self.contains(c));
        let (_, w1) = self.widths();
        (c[0] - self.extents[0].0) as usize * w1 + (c[1] - self.extents[1].0) as usize
    }

    pub(crate) fn cell_at(&self, idx: usize) -> Cell {
        let (_, w1) = self.widths();
        [
            self.extents[0].0 + (idx / w1) as i64,
            self.extents[1].0 + (idx % w1) as i64,
        ]
    }

    /// Physical coordinates of a cell center.
    pub fn coord(&self, c: Cell) -> [f64; 2] {
        [c[0] as f64 * self.h, c[1] as f64 * self.h]
    }

    /// All cells of the extents, in raster order.
    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (0..self.len()).map(move |i| self.cell_at(i))
    }

    /// Index range of cell centers strictly inside the open interval `(a, b)`.
    pub fn indices_in_open_interval(h: f64, a: f64, b: f64) -> Result<(i64, i64)> {
        if !(h > 0.0) {
            return Err(Error::InvalidParameter(format!("cell spacing must be positive, got {h}")));
        }
        if !(a < b) {
            return Err(Error::InvalidParameter(format!("empty interval ({a}, {b})")));
        }
        let mut lo = (a / h).floor() as i64;
        while lo as f64 * h <= a {
            lo += 1;
        }
        let mut hi = (b / h).ceil() as i64;
        while hi as f64 * h >= b {
            hi -= 1;
        }
        if lo > hi {
            return Err(Error::InvalidParameter(format!(
                "interval ({a}, {b}) contains no cell centers at spacing {h}"
            )));
        }
        Ok((lo, hi))
    }
}

/// A finite set of lattice cells, immutable after construction.
#[derive(Clone, Debug, PartialEq)]
pub struct Region {
    lattice: Lattice,
    mask: Vec<bool>,
    count: usize,
}

impl Region {
    pub fn empty(lattice: &Lattice) -> Region {
        Region { lattice: lattice.clone(), mask: vec![false; lattice.len()], count: 0 }
    }

    pub fn full(lattice: &Lattice) -> Region {
        Region { lattice: lattice.clone(), mask: vec![true; lattice.len()], count: lattice.len() }
    }

    pub fn from_cells<I: IntoIterator<Item = Cell>>(lattice: &Lattice, cells: I) -> Result<Region> {
        let mut r = Region::empty(lattice);
        for c in cells {
            if !lattice.contains(c) {
                return Err(Error::CellOutOfExtents(c[0], c[1]));
            }
            let idx = lattice.raster(c);
            if !r.mask[idx] {
                r.mask[idx] = true;
                r.count += 1;
            }
        }
        Ok(r)
    }

    pub fn from_predicate(lattice: &Lattice, mut pred: impl FnMut(Cell) -> bool) -> Region {
        let mut r = Region::empty(lattice);
        for idx in 0..lattice.len() {
            if pred(lattice.cell_at(idx)) {
                r.mask[idx] = true;
                r.count += 1;
            }
        }
        r
    }

    /// Cells whose centers lie strictly inside the open interval `(a, b)`
    /// (one-dimensional lattices).
    pub fn interval(lattice: &Lattice, a: f64, b: f64) -> Result<Region> {
        if lattice.dim() != 1 {
            return Err(Error::InvalidParameter("interval regions require a 1-D lattice".into()));
        }
        let (lo, hi) = Lattice::indices_in_open_interval(lattice.h(), a, b)?;
        Region::from_cells(lattice, (lo.max(lattice.extents[0].0)..=hi.min(lattice.extents[0].1)).map(|i| [i, 0]))
    }

    /// Cells whose centers lie inside the open disk of radius `radius`
    /// centered at physical coordinates `(cx, cy)`.
    pub fn disk(lattice: &Lattice, cx: f64, cy: f64, radius: f64) -> Result<Region> {
        if lattice.dim() != 2 {
            return Err(Error::InvalidParameter("disk regions require a 2-D lattice".into()));
        }
        Ok(Region::from_predicate(lattice, |c| {
            let [x, y] = lattice.coord(c);
            (x - cx).powi(2) + (y - cy).powi(2) < radius * radius
        }))
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn contains(&self, c: Cell) -> bool {
        self.lattice.contains(c) && self.mask[self.lattice.raster(c)]
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    /// Lebesgue measure of the cell union: `count * h^dim`.
    pub fn measure(&self) -> f64 {
        self.count as f64 * self.lattice.h().powi(self.lattice.dim() as i32)
    }

    /// Cells of the region in raster order.
    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        self.mask
            .iter()
            .enumerate()
            .filter(|(_, &m)| m)
            .map(move |(i, _)| self.lattice.cell_at(i))
    }

    fn check_same_lattice(&self, other: &Region) {
        assert_eq!(self.lattice, other.lattice, "regions live on different lattices");
    }

    pub fn union(&self, other: &Region) -> Region {
        self.check_same_lattice(other);
        let mut r = self.clone();
        r.count = 0;
        for (m, &o) in r.mask.iter_mut().zip(&other.mask) {
            *m = *m || o;
            r.count += *m as usize;
        }
        r
    }

    pub fn intersection(&self, other: &Region) -> Region {
        self.check_same_lattice(other);
        let mut r = self.clone();
        r.count = 0;
        for (m, &o) in r.mask.iter_mut().zip(&other.mask) {
            *m = *m && o;
            r.count += *m as usize;
        }
        r
    }

    pub fn difference(&self, other: &Region) -> Region {
        self.check_same_lattice(other);
        let mut r = self.clone();
        r.count = 0;
        for (m, &o) in r.mask.iter_mut().zip(&other.mask) {
            *m = *m && !o;
            r.count += *m as usize;
        }
        r
    }

    /// Complement within the lattice extents.
    pub fn complement(&self) -> Region {
        let mut r = self.clone();
        r.count = 0;
        for m in r.mask.iter_mut() {
            *m = !*m;
            r.count += *m as usize;
        }
        r
    }

    pub fn is_subset_of(&self, other: &Region) -> bool {
        self.check_same_lattice(other);
        self.mask.iter().zip(&other.mask).all(|(&a, &b)| !a || b)
    }
}

/// Discrete closed Euclidean ball: all integer offsets `j` with `|j|_2 <= k`.
#[derive(Clone, Debug, PartialEq)]
pub struct BallStencil {
    k: i64,
    dim: usize,
    offsets: Vec<Cell>,
}

impl BallStencil {
    pub fn k(&self) -> i64 {
        self.k
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn offsets(&self) -> &[Cell] {
        &self.offsets
    }

    /// Chord half-widths of the 2-D ball: `w(dy) = floor(sqrt(k^2 - dy^2))`
    /// for `dy` in `-k..=k`. In 1-D the single chord is the whole window.
    pub(crate) fn chord_half_width(&self, dy: i64) -> i64 {
        debug_assert!(dy.abs() <= self.k);
        ((self.k * self.k - dy * dy) as f64).sqrt().floor() as i64
    }
}

/// Builds the discrete ball for radius `r` on a lattice of spacing `h`,
/// with `k = round(r / h)`. Rejects `r < h/2`, where the stencil would
/// degenerate to a single cell.
pub fn ball_stencil(r: f64, h: f64, dim: usize) -> Result<BallStencil> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidParameter(format!("cell spacing must be positive, got {h}")));
    }
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::InvalidParameter(format!("radius must be positive, got {r}")));
    }
    if dim != 1 && dim != 2 {
        return Err(Error::InvalidParameter(format!("dimension must be 1 or 2, got {dim}")));
    }
    if r < h / 2.0 {
        return Err(Error::RadiusBelowResolution { r, h });
    }
    let k = (r / h).round() as i64;
    let mut offsets = Vec::new();
    if dim == 1 {
        for j in -k..=k {
            offsets.push([j, 0]);
        }
    } else {
        for j0 in -k..=k {
            for j1 in -k..=k {
                if j0 * j0 + j1 * j1 <= k * k {
                    offsets.push([j0, j1]);
                }
            }
        }
    }
    Ok(BallStencil { k, dim, offsets })
}

/// Minkowski dilation `A ⊕ B_k`. Errors when the dilation would leave the
/// lattice extents: every evaluation region must fit together with its
/// r-neighborhood.
pub fn dilate(a: &Region, s: &BallStencil) -> Result<Region> {
    check_stencil_dim(a, s)?;
    let lat = a.lattice().clone();
    let mut mask = vec![false; lat.len()];
    let mut count = 0usize;
    for c in a.cells() {
        for off in s.offsets() {
            let t = [c[0] + off[0], c[1] + off[1]];
            if !lat.contains(t) {
                return Err(Error::DomainTooSmallForRadius(t[0], t[1]));
            }
            let idx = lat.raster(t);
            if !mask[idx] {
                mask[idx] = true;
                count += 1;
            }
        }
    }
    Ok(Region { lattice: lat, mask, count })
}

/// Dilation clipped to the lattice extents. Used internally for bands and
/// for the erosion duality, where spilling past the extents is expected.
pub fn dilate_clipped(a: &Region, s: &BallStencil) -> Region {
    let lat = a.lattice().clone();
    let mut mask = vec![false; lat.len()];
    let mut count = 0usize;
    for c in a.cells() {
        for off in s.offsets() {
            let t = [c[0] + off[0], c[1] + off[1]];
            if lat.contains(t) {
                let idx = lat.raster(t);
                if !mask[idx] {
                    mask[idx] = true;
                    count += 1;
                }
            }
        }
    }
    Region { lattice: lat, mask, count }
}

/// Morphological erosion `A ⊖ B_k`, via the duality
/// `erode(A) = complement(dilate(complement(A)))` within the extents.
/// Cells outside the extents are treated as absent from the complement, so
/// the full lattice is stencil-invariant.
pub fn erode(a: &Region, s: &BallStencil) -> Result<Region> {
    check_stencil_dim(a, s)?;
    Ok(dilate_clipped(&a.complement(), s).complement())
}

/// The width-k boundary strip `Ω \ (Ω ⊖ B_k)`.
pub fn collar(omega: &Region, s: &BallStencil) -> Result<Region> {
    Ok(omega.difference(&erode(omega, s)?))
}

/// Cells of `a` whose entire window `x + B_k` stays inside `a`. Unlike
/// [`erode`], cells near the lattice border whose window leaves the extents
/// are excluded; this is the right notion for "where can a field be
/// evaluated".
pub fn window_interior(a: &Region, s: &BallStencil) -> Result<Region> {
    check_stencil_dim(a, s)?;
    let lat = a.lattice().clone();
    let mut mask = vec![false; lat.len()];
    let mut count = 0usize;
    'cells: for c in a.cells() {
        for off in s.offsets() {
            let t = [c[0] + off[0], c[1] + off[1]];
            if !lat.contains(t) || !a.contains(t) {
                continue 'cells;
            }
        }
        mask[lat.raster(c)] = true;
        count += 1;
    }
    Ok(Region { lattice: lat, mask, count })
}

fn check_stencil_dim(a: &Region, s: &BallStencil) -> Result<()> {
    if a.lattice().dim() != s.dim() {
        return Err(Error::InvalidParameter(format!(
            "stencil dimension {} does not match lattice dimension {}",
            s.dim(),
            a.lattice().dim()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn interval_region(lat: &Lattice, lo: i64, hi: i64) -> Region {
        Region::from_cells(lat, (lo..=hi).map(|i| [i, 0])).unwrap()
    }

    #[test]
    fn stencil_1d_unit() {
        let s = ball_stencil(1.0, 1.0, 1).unwrap();
        assert_eq!(s.k(), 1);
        assert_eq!(s.offsets(), &[[-1, 0], [0, 0], [1, 0]]);
    }

    #[test]
    fn stencil_2d_radius_two() {
        // all |j|^2 <= 4 in [-2,2]^2
        let s = ball_stencil(2.0, 1.0, 2).unwrap();
        assert_eq!(s.k(), 2);
        assert_eq!(s.offsets().len(), 13);
        assert!(s.offsets().contains(&[0, 0]));
        for off in s.offsets() {
            assert!(s.offsets().contains(&[-off[0], -off[1]]), "not symmetric: {off:?}");
        }
    }

    #[test]
    fn stencil_fractional_spacing() {
        let s = ball_stencil(0.25, 0.05, 1).unwrap();
        assert_eq!(s.k(), 5);
        assert_eq!(s.offsets().len(), 11);
    }

    #[test]
    fn stencil_rejects_subresolution_radius() {
        assert!(matches!(
            ball_stencil(0.2, 1.0, 1),
            Err(Error::RadiusBelowResolution { .. })
        ));
    }

    #[test]
    fn dilate_empty_is_empty() {
        let lat = Lattice::line(1.0, 0, 20).unwrap();
        let s = ball_stencil(2.0, 1.0, 1).unwrap();
        let d = dilate(&Region::empty(&lat), &s).unwrap();
        assert!(d.is_empty());
    }

    #[test]
    fn dilate_1d_interval() {
        let lat = Lattice::line(1.0, 0, 20).unwrap();
        let s = ball_stencil(2.0, 1.0, 1).unwrap();
        let a = interval_region(&lat, 5, 9);
        let d = dilate(&a, &s).unwrap();
        assert_eq!(d, interval_region(&lat, 3, 11));
        assert!(a.is_subset_of(&d));
    }

    #[test]
    fn dilate_2d_single_cell_plus() {
        let lat = Lattice::grid(1.0, (0, 6), (0, 6)).unwrap();
        let s = ball_stencil(1.0, 1.0, 2).unwrap();
        let a = Region::from_cells(&lat, [[3, 3]]).unwrap();
        let d = dilate(&a, &s).unwrap();
        let plus = Region::from_cells(&lat, [[3, 3], [2, 3], [4, 3], [3, 2], [3, 4]]).unwrap();
        assert_eq!(d, plus);
    }

    #[test]
    fn dilate_out_of_extents_errors() {
        let lat = Lattice::line(1.0, 0, 10).unwrap();
        let s = ball_stencil(2.0, 1.0, 1).unwrap();
        let a = interval_region(&lat, 0, 3);
        assert!(matches!(dilate(&a, &s), Err(Error::DomainTooSmallForRadius(..))));
    }

    #[test]
    fn erode_full_lattice_is_full() {
        let lat = Lattice::grid(1.0, (0, 9), (0, 9)).unwrap();
        let s = ball_stencil(2.0, 1.0, 2).unwrap();
        let full = Region::full(&lat);
        assert_eq!(erode(&full, &s).unwrap(), full);
    }

    #[test]
    fn erode_1d_interval() {
        let lat = Lattice::line(1.0, 0, 20).unwrap();
        let s = ball_stencil(2.0, 1.0, 1).unwrap();
        let a = interval_region(&lat, 3, 11);
        assert_eq!(erode(&a, &s).unwrap(), interval_region(&lat, 5, 9));
    }

    #[test]
    fn open_close_fixed_points_on_rectangles() {
        // 1-D intervals are fixed points of both opening and closing
        let line = Lattice::line(1.0, 0, 20).unwrap();
        let s1 = ball_stencil(2.0, 1.0, 1).unwrap();
        let seg = interval_region(&line, 5, 14);
        assert_eq!(dilate(&erode(&seg, &s1).unwrap(), &s1).unwrap(), seg);
        assert_eq!(erode(&dilate(&seg, &s1).unwrap(), &s1).unwrap(), seg);

        // 2-D rectangles are fixed points of closing; opening shaves the
        // four corners (the k=1 Euclidean ball is a plus shape)
        let lat = Lattice::grid(1.0, (0, 9), (0, 9)).unwrap();
        let s = ball_stencil(1.0, 1.0, 2).unwrap();
        let rect = Region::from_predicate(&lat, |c| (2..=7).contains(&c[0]) && (3..=7).contains(&c[1]));
        let closed = erode(&dilate(&rect, &s).unwrap(), &s).unwrap();
        assert_eq!(closed, rect);
        let opened = dilate(&erode(&rect, &s).unwrap(), &s).unwrap();
        let corners = Region::from_cells(&lat, [[2, 3], [2, 7], [7, 3], [7, 7]]).unwrap();
        assert_eq!(opened, rect.difference(&corners));
        assert_eq!(dilate(&erode(&opened, &s).unwrap(), &s).unwrap(), opened);
    }

    #[test]
    fn collar_of_interval() {
        let lat = Lattice::line(1.0, 0, 20).unwrap();
        let s = ball_stencil(2.0, 1.0, 1).unwrap();
        let omega = interval_region(&lat, 5, 13); // 9 cells
        let c = collar(&omega, &s).unwrap();
        assert_eq!(
            c,
            Region::from_cells(&lat, [[5, 0], [6, 0], [12, 0], [13, 0]]).unwrap()
        );
        let core = erode(&omega, &s).unwrap();
        assert_eq!(core.union(&c), omega);
        assert!(core.intersection(&c).is_empty());
    }

    #[test]
    fn collar_of_tiny_region_is_everything() {
        let lat = Lattice::line(1.0, 0, 20).unwrap();
        let s = ball_stencil(3.0, 1.0, 1).unwrap();
        let omega = interval_region(&lat, 8, 11); // shorter than the stencil
        assert!(erode(&omega, &s).unwrap().is_empty());
        assert_eq!(collar(&omega, &s).unwrap(), omega);
    }

    #[test]
    fn measure_counts_cells() {
        let lat = Lattice::line(0.1, 0, 200).unwrap();
        assert_eq!(Region::empty(&lat).measure(), 0.0);
        let a = interval_region(&lat, 1, 100);
        assert!((a.measure() - 10.0).abs() < 1e-12);
    }

    #[test]
    fn disk_measure_matches_area() {
        // cell counting vs pi R^2 at h = R/100
        let radius = 1.0;
        let h = radius / 100.0;
        let lat = Lattice::grid(h, (-110, 110), (-110, 110)).unwrap();
        let d = Region::disk(&lat, 0.0, 0.0, radius).unwrap();
        let exact = std::f64::consts::PI * radius * radius;
        assert!((d.measure() - exact).abs() / exact < 0.02);
    }

    #[test]
    fn interval_region_open_endpoints() {
        let lat = Lattice::line(0.5, -10, 10).unwrap();
        // (-1, 1) at h = 0.5: centers -0.5, 0.0, 0.5; endpoints excluded
        let a = Region::interval(&lat, -1.0, 1.0).unwrap();
        assert_eq!(a, Region::from_cells(&lat, [[-1, 0], [0, 0], [1, 0]]).unwrap());
    }
}
