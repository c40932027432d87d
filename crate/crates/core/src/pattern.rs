//! Planar point patterns and the Strauss sufficient statistics.
//!
//! Two pairs are "close" when their Euclidean distance is at most `r`
//! (ties count). There is no edge correction and no periodic wrap: the
//! statistics are those of the pattern restricted to its window.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    #[inline]
    pub fn dist_sq(&self, other: &Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }
}

/// The single closeness predicate shared by every counting path, so that the
/// brute-force and grid-indexed counts agree exactly.
#[inline]
fn is_close(a: &Point, b: &Point, r_sq: f64) -> bool {
    a.dist_sq(b) <= r_sq
}

fn check_radius(r: f64) -> Result<()> {
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "interaction radius must be finite and positive, got {r}"
        )));
    }
    Ok(())
}

/// Closed axis-aligned rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Window {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Result<Self> {
        let finite = [x_min, x_max, y_min, y_max].iter().all(|v| v.is_finite());
        if !finite || x_min >= x_max || y_min >= y_max {
            return Err(Error::InvalidParameter(format!(
                "window needs finite bounds with min < max, got [{x_min}, {x_max}] x [{y_min}, {y_max}]"
            )));
        }
        Ok(Window {
            x_min,
            x_max,
            y_min,
            y_max,
        })
    }

    pub fn unit_square() -> Self {
        Window {
            x_min: 0.0,
            x_max: 1.0,
            y_min: 0.0,
            y_max: 1.0,
        }
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn contains(&self, p: &Point) -> bool {
        p.x >= self.x_min && p.x <= self.x_max && p.y >= self.y_min && p.y <= self.y_max
    }

    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        Point {
            x: self.x_min + self.width() * rng.gen::<f64>(),
            y: self.y_min + self.height() * rng.gen::<f64>(),
        }
    }

    pub(crate) fn check_contains(&self, p: &Point) -> Result<()> {
        if !(p.x.is_finite() && p.y.is_finite()) || !self.contains(p) {
            return Err(Error::Domain(format!(
                "point ({}, {}) lies outside the window [{}, {}] x [{}, {}]",
                p.x, p.y, self.x_min, self.x_max, self.y_min, self.y_max
            )));
        }
        Ok(())
    }
}

/// Finite set of points inside a window. Order is kept but carries no meaning.
#[derive(Debug, Clone, PartialEq)]
pub struct PointPattern {
    window: Window,
    points: Vec<Point>,
}

impl PointPattern {
    pub fn empty(window: Window) -> Self {
        PointPattern {
            window,
            points: Vec::new(),
        }
    }

    pub fn new(window: Window, points: Vec<Point>) -> Result<Self> {
        for p in &points {
            window.check_contains(p)?;
        }
        Ok(PointPattern { window, points })
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn push(&mut self, p: Point) -> Result<()> {
        self.window.check_contains(&p)?;
        self.points.push(p);
        Ok(())
    }

    /// Removes point `index`, moving the last point into its slot.
    pub fn swap_remove(&mut self, index: usize) -> Result<Point> {
        self.check_index(index)?;
        Ok(self.points.swap_remove(index))
    }

    fn check_index(&self, index: usize) -> Result<()> {
        if index >= self.points.len() {
            return Err(Error::Domain(format!(
                "point index {index} out of range for a pattern of {} points",
                self.points.len()
            )));
        }
        Ok(())
    }

    /// Number of points within `r` of `u`, skipping the point at `skip`.
    fn neighbors_brute(&self, u: &Point, r: f64, skip: Option<usize>) -> usize {
        let r_sq = r * r;
        self.points
            .iter()
            .enumerate()
            .filter(|&(i, p)| Some(i) != skip && is_close(u, p, r_sq))
            .count()
    }
}

/// Statistic vector `t(y)`. Stored as reals so that empirical means fit too.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SufficientStats(pub Vec<f64>);

impl SufficientStats {
    pub fn new(values: Vec<f64>) -> Self {
        SufficientStats(values)
    }

    pub fn zeros(len: usize) -> Self {
        SufficientStats(vec![0.0; len])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn add_assign(&mut self, other: &[f64]) {
        for (a, b) in self.0.iter_mut().zip(other) {
            *a += b;
        }
    }

    pub fn sub_assign(&mut self, other: &[f64]) {
        for (a, b) in self.0.iter_mut().zip(other) {
            *a -= b;
        }
    }

    pub fn diff(&self, other: &SufficientStats) -> SufficientStats {
        SufficientStats(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }
}

impl From<Vec<f64>> for SufficientStats {
    fn from(v: Vec<f64>) -> Self {
        SufficientStats(v)
    }
}

impl<const N: usize> From<[f64; N]> for SufficientStats {
    fn from(v: [f64; N]) -> Self {
        SufficientStats(v.to_vec())
    }
}

/// Exact O(n²) count of unordered pairs at distance at most `r`.
pub fn count_close_pairs(pattern: &PointPattern, r: f64) -> Result<u64> {
    check_radius(r)?;
    let r_sq = r * r;
    let pts = pattern.points();
    let mut count = 0u64;
    for (i, a) in pts.iter().enumerate() {
        for b in &pts[i + 1..] {
            if is_close(a, b, r_sq) {
                count += 1;
            }
        }
    }
    Ok(count)
}

/// `(n(y), s_r(y))`.
pub fn suff_stats(pattern: &PointPattern, r: f64) -> Result<SufficientStats> {
    let pairs = count_close_pairs(pattern, r)?;
    Ok(SufficientStats(vec![pattern.len() as f64, pairs as f64]))
}

/// `t(y ∪ {u}) − t(y)`; the pattern is not modified.
pub fn stat_delta_insert(
    pattern: &PointPattern,
    candidate: &Point,
    r: f64,
) -> Result<SufficientStats> {
    check_radius(r)?;
    pattern.window().check_contains(candidate)?;
    let k = pattern.neighbors_brute(candidate, r, None);
    Ok(SufficientStats(vec![1.0, k as f64]))
}

/// `t(y) − t(y \ {p_index})`.
pub fn stat_delta_remove(pattern: &PointPattern, index: usize, r: f64) -> Result<SufficientStats> {
    check_radius(r)?;
    pattern.check_index(index)?;
    let k = pattern.neighbors_brute(&pattern.points()[index], r, Some(index));
    Ok(SufficientStats(vec![1.0, k as f64]))
}

/// Largest number of cells per axis. Bounds memory for radii that are tiny
/// relative to the window; cells then exceed `r`, which stays correct.
const MAX_CELLS_PER_AXIS: usize = 256;

/// A point pattern kept in sync with a uniform grid of cell side at least
/// `r`, so neighbour queries only visit the 3x3 block around a cell.
#[derive(Debug, Clone)]
pub struct IndexedPattern {
    pattern: PointPattern,
    r: f64,
    r_sq: f64,
    nx: usize,
    ny: usize,
    cell_w: f64,
    cell_h: f64,
    cells: Vec<Vec<usize>>,
    cell_of: Vec<usize>,
}

impl IndexedPattern {
    pub fn new(pattern: PointPattern, r: f64) -> Result<Self> {
        check_radius(r)?;
        let w = pattern.window();
        let nx = ((w.width() / r).floor() as usize).clamp(1, MAX_CELLS_PER_AXIS);
        let ny = ((w.height() / r).floor() as usize).clamp(1, MAX_CELLS_PER_AXIS);
        let mut out = IndexedPattern {
            cell_w: w.width() / nx as f64,
            cell_h: w.height() / ny as f64,
            pattern: PointPattern::empty(*w),
            r,
            r_sq: r * r,
            nx,
            ny,
            cells: vec![Vec::new(); nx * ny],
            cell_of: Vec::new(),
        };
        for p in pattern.points {
            out.insert(p)?;
        }
        Ok(out)
    }

    pub fn pattern(&self) -> &PointPattern {
        &self.pattern
    }

    pub fn into_pattern(self) -> PointPattern {
        self.pattern
    }

    pub fn radius(&self) -> f64 {
        self.r
    }

    pub fn len(&self) -> usize {
        self.pattern.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pattern.is_empty()
    }

    fn cell_coords(&self, p: &Point) -> (usize, usize) {
        let w = &self.pattern.window;
        let cx = (((p.x - w.x_min) / self.cell_w) as usize).min(self.nx - 1);
        let cy = (((p.y - w.y_min) / self.cell_h) as usize).min(self.ny - 1);
        (cx, cy)
    }

    /// Neighbours of `u` within `r`, not counting the point at `skip`.
    pub fn neighbors(&self, u: &Point, skip: Option<usize>) -> usize {
        let (cx, cy) = self.cell_coords(u);
        let pts = self.pattern.points();
        let mut count = 0;
        for gy in cy.saturating_sub(1)..=(cy + 1).min(self.ny - 1) {
            for gx in cx.saturating_sub(1)..=(cx + 1).min(self.nx - 1) {
                for &i in &self.cells[gy * self.nx + gx] {
                    if Some(i) != skip && is_close(u, &pts[i], self.r_sq) {
                        count += 1;
                    }
                }
            }
        }
        count
    }

    pub fn insert(&mut self, p: Point) -> Result<()> {
        self.pattern.push(p)?;
        let (cx, cy) = self.cell_coords(&p);
        let cell = cy * self.nx + cx;
        self.cells[cell].push(self.pattern.len() - 1);
        self.cell_of.push(cell);
        Ok(())
    }

    pub fn remove(&mut self, index: usize) -> Result<Point> {
        self.pattern.check_index(index)?;
        let last = self.pattern.len() - 1;
        let cell = self.cell_of[index];
        let slot = self.cells[cell]
            .iter()
            .position(|&i| i == index)
            .expect("grid out of sync");
        self.cells[cell].swap_remove(slot);
        if index != last {
            let moved_cell = self.cell_of[last];
            let entry = self.cells[moved_cell]
                .iter_mut()
                .find(|i| **i == last)
                .expect("grid out of sync");
            *entry = index;
        }
        self.cell_of.swap_remove(index);
        self.pattern.swap_remove(index)
    }

    /// Close-pair count via the grid; agrees exactly with [`count_close_pairs`].
    pub fn close_pairs(&self) -> u64 {
        let total: usize = self
            .pattern
            .points()
            .iter()
            .enumerate()
            .map(|(i, p)| self.neighbors(p, Some(i)))
            .sum();
        (total / 2) as u64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pat(points: &[(f64, f64)]) -> PointPattern {
        PointPattern::new(
            Window::unit_square(),
            points.iter().map(|&(x, y)| Point::new(x, y)).collect(),
        )
        .unwrap()
    }

    fn random_pattern(rng: &mut ChaCha8Rng, n: usize) -> PointPattern {
        let w = Window::unit_square();
        let pts = (0..n).map(|_| w.sample_uniform(rng)).collect();
        PointPattern::new(w, pts).unwrap()
    }

    fn brute_pairs(p: &PointPattern, r: f64) -> u64 {
        let pts = p.points();
        let mut c = 0;
        for i in 0..pts.len() {
            for j in 0..pts.len() {
                if i < j
                    && ((pts[i].x - pts[j].x).powi(2) + (pts[i].y - pts[j].y).powi(2)).sqrt() <= r
                {
                    c += 1;
                }
            }
        }
        c
    }

    #[test]
    fn close_pairs_examples() {
        assert_eq!(count_close_pairs(&pat(&[]), 0.1).unwrap(), 0);
        assert_eq!(
            count_close_pairs(&pat(&[(0.10, 0.10), (0.15, 0.10)]), 0.1).unwrap(),
            1
        );
        let line = pat(&[(0.0, 0.0), (0.05, 0.0), (0.20, 0.0), (0.26, 0.0)]);
        assert_eq!(count_close_pairs(&line, 0.1).unwrap(), 2);
    }

    #[test]
    fn pair_at_exactly_r_is_close() {
        let p = pat(&[(0.0, 0.0), (0.5, 0.0)]);
        assert_eq!(count_close_pairs(&p, 0.5).unwrap(), 1);
    }

    #[test]
    fn bad_radius_rejected() {
        let p = pat(&[(0.1, 0.1)]);
        for r in [0.0, -1.0, f64::NAN, f64::INFINITY] {
            assert!(matches!(
                count_close_pairs(&p, r),
                Err(Error::InvalidParameter(_))
            ));
            assert!(suff_stats(&p, r).is_err());
            assert!(IndexedPattern::new(p.clone(), r).is_err());
        }
    }

    #[test]
    fn suff_stats_examples() {
        assert_eq!(suff_stats(&pat(&[]), 0.1).unwrap().values(), &[0.0, 0.0]);
        let two = pat(&[(0.10, 0.10), (0.15, 0.10)]);
        assert_eq!(suff_stats(&two, 0.1).unwrap().values(), &[2.0, 1.0]);

        let mut rng = ChaCha8Rng::seed_from_u64(50);
        let p = random_pattern(&mut rng, 50);
        let t = suff_stats(&p, 0.1).unwrap();
        assert_eq!(t.values(), &[50.0, brute_pairs(&p, 0.1) as f64]);
    }

    #[test]
    fn window_is_closed_and_validated() {
        let w = Window::unit_square();
        assert!(w.contains(&Point::new(0.0, 1.0)));
        assert!(!w.contains(&Point::new(1.0 + 1e-12, 0.5)));
        assert!(Window::new(1.0, 0.0, 0.0, 1.0).is_err());
        assert!(Window::new(0.0, 1.0, 0.0, f64::NAN).is_err());
        assert!(PointPattern::new(w, vec![Point::new(1.5, 0.5)]).is_err());
    }

    #[test]
    fn delta_insert_examples() {
        let u = Point::new(0.3, 0.3);
        assert_eq!(
            stat_delta_insert(&pat(&[]), &u, 0.1).unwrap().values(),
            &[1.0, 0.0]
        );
        let one = pat(&[(0.35, 0.3)]);
        assert_eq!(
            stat_delta_insert(&one, &u, 0.1).unwrap().values(),
            &[1.0, 1.0]
        );
        assert!(matches!(
            stat_delta_insert(&one, &Point::new(2.0, 0.0), 0.1),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn delta_remove_examples() {
        assert_eq!(
            stat_delta_remove(&pat(&[(0.5, 0.5)]), 0, 0.1)
                .unwrap()
                .values(),
            &[1.0, 0.0]
        );
        let two = pat(&[(0.10, 0.10), (0.15, 0.10)]);
        for i in 0..2 {
            assert_eq!(
                stat_delta_remove(&two, i, 0.1).unwrap().values(),
                &[1.0, 1.0]
            );
        }
        assert!(matches!(
            stat_delta_remove(&two, 2, 0.1),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn deltas_match_recount_on_random_patterns() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let p = random_pattern(&mut rng, 100);
            let before = suff_stats(&p, 0.1).unwrap();

            let u = Point::new(rng.gen(), rng.gen());
            let mut with_u = p.clone();
            with_u.push(u).unwrap();
            let expect = suff_stats(&with_u, 0.1).unwrap().diff(&before);
            assert_eq!(stat_delta_insert(&p, &u, 0.1).unwrap(), expect);

            let idx = rng.gen_range(0..p.len());
            let mut without = p.clone();
            without.swap_remove(idx).unwrap();
            let expect = before.diff(&suff_stats(&without, 0.1).unwrap());
            assert_eq!(stat_delta_remove(&p, idx, 0.1).unwrap(), expect);
        }
    }

    #[test]
    fn grid_agrees_with_brute_force_through_updates() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let w = Window::new(-1.0, 2.0, 0.0, 0.5).unwrap();
        for &r in &[0.01, 0.1, 0.37, 5.0] {
            let mut idx = IndexedPattern::new(PointPattern::empty(w), r).unwrap();
            for _ in 0..500 {
                if idx.is_empty() || rng.gen_bool(0.55) {
                    idx.insert(w.sample_uniform(&mut rng)).unwrap();
                } else {
                    let i = rng.gen_range(0..idx.len());
                    idx.remove(i).unwrap();
                }
                let u = w.sample_uniform(&mut rng);
                assert_eq!(
                    idx.neighbors(&u, None),
                    idx.pattern().neighbors_brute(&u, r, None)
                );
            }
            assert_eq!(
                idx.close_pairs(),
                count_close_pairs(idx.pattern(), r).unwrap()
            );
        }
    }

    #[test]
    fn boundary_points_index_cleanly() {
        let mut idx = IndexedPattern::new(PointPattern::empty(Window::unit_square()), 0.1).unwrap();
        for p in [(1.0, 1.0), (0.0, 0.0), (1.0, 0.0), (0.95, 0.95)] {
            idx.insert(Point::new(p.0, p.1)).unwrap();
        }
        assert_eq!(idx.close_pairs(), 1);
    }
}
