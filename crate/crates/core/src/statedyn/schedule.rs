//! Windowed Hermitian couplings between components.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

const HERMITIAN_TOL: f64 = 1e-12;

/// Half-open activity window `[start, end)` in seconds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Window {
    pub start: f64,
    pub end: f64,
}

impl Window {
    pub fn new(start: f64, end: f64) -> Self {
        Window { start, end }
    }

    pub fn always() -> Self {
        Window { start: f64::NEG_INFINITY, end: f64::INFINITY }
    }

    pub fn contains(&self, t: f64) -> bool {
        self.start <= t && t < self.end
    }
}

/// A single directed matrix entry `H(row, col)` in rad/s.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Coupling {
    pub row: usize,
    pub col: usize,
    pub strength: Complex64,
    pub window: Window,
}

/// Dense square complex matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl Matrix {
    pub fn zeros(dim: usize) -> Self {
        Matrix { dim, data: vec![Complex64::new(0.0, 0.0); dim * dim] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.dim + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: Complex64) {
        self.data[row * self.dim + col] = value;
    }

    fn add(&mut self, row: usize, col: usize, value: Complex64) {
        self.data[row * self.dim + col] += value;
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|z| z.norm_sqr() == 0.0)
    }

    /// Zeroes row and column `index`.
    pub fn isolate(&mut self, index: usize) {
        for k in 0..self.dim {
            self.set(index, k, Complex64::new(0.0, 0.0));
            self.set(k, index, Complex64::new(0.0, 0.0));
        }
    }

    pub fn is_hermitian(&self) -> bool {
        (0..self.dim).all(|r| {
            (r..self.dim).all(|c| {
                let a = self.get(r, c);
                let b = self.get(c, r).conj();
                (a - b).norm() <= HERMITIAN_TOL * (1.0 + a.norm())
            })
        })
    }

    pub fn mul_vec(&self, v: &[Complex64], out: &mut [Complex64]) {
        for (r, o) in out.iter_mut().enumerate() {
            let row = &self.data[r * self.dim..(r + 1) * self.dim];
            *o = row.iter().zip(v).map(|(h, c)| h * c).sum();
        }
    }

    /// Largest absolute entry; bounds the fastest coupling frequency.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// Hermitian coupling schedule with an optional set of masked pairs.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct HamiltonianSchedule {
    entries: Vec<Coupling>,
    mask: BTreeSet<(usize, usize)>,
}

fn pair(m: usize, n: usize) -> (usize, usize) {
    (m.min(n), m.max(n))
}

impl HamiltonianSchedule {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `H(m, n) = g` and `H(n, m) = conj(g)` over `window`. For `m == n` only the real part is used.
    pub fn couple(&mut self, m: usize, n: usize, g: Complex64, window: Window) -> &mut Self {
        if m == n {
            self.entries.push(Coupling { row: m, col: m, strength: Complex64::new(g.re, 0.0), window });
        } else {
            self.entries.push(Coupling { row: m, col: n, strength: g, window });
            self.entries.push(Coupling { row: n, col: m, strength: g.conj(), window });
        }
        self
    }

    /// Adds one directed entry without its conjugate partner.
    pub fn push_entry(&mut self, entry: Coupling) -> &mut Self {
        self.entries.push(entry);
        self
    }

    pub fn entries(&self) -> &[Coupling] {
        &self.entries
    }

    /// Forces both `(m, n)` and `(n, m)` to zero.
    pub fn mask_pair(&mut self, m: usize, n: usize) {
        self.mask.insert(pair(m, n));
    }

    pub fn clear_mask(&mut self) {
        self.mask.clear();
    }

    pub fn is_masked(&self, m: usize, n: usize) -> bool {
        self.mask.contains(&pair(m, n))
    }

    pub fn masked_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.mask.iter().copied()
    }

    /// Closes every window on the `(m, n)` pair at time `t`.
    pub fn end_window(&mut self, m: usize, n: usize, t: f64) {
        for e in &mut self.entries {
            if pair(e.row, e.col) == pair(m, n) && e.window.end > t {
                e.window.end = t.max(e.window.start);
            }
        }
    }

    /// Largest index referenced by any entry, plus one.
    pub fn min_dim(&self) -> usize {
        self.entries.iter().map(|e| e.row.max(e.col) + 1).max().unwrap_or(0)
    }

    /// Effective matrix at `t` for `dim` components, with masks applied.
    pub fn matrix_at(&self, t: f64, dim: usize) -> Result<Matrix> {
        let mut h = Matrix::zeros(dim);
        for e in self.entries.iter().filter(|e| e.window.contains(t)) {
            if e.row >= dim || e.col >= dim {
                return Err(Error::Dimension { expected: dim, found: e.row.max(e.col) + 1 });
            }
            if e.row != e.col && self.is_masked(e.row, e.col) {
                continue;
            }
            h.add(e.row, e.col, e.strength);
        }
        if !h.is_hermitian() {
            return Err(Error::Config(format!("effective Hamiltonian at t = {t} is not Hermitian")));
        }
        Ok(h)
    }

    /// Every window edge, sorted and deduplicated.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut pts: Vec<f64> =
            self.entries.iter().flat_map(|e| [e.window.start, e.window.end]).filter(|t| t.is_finite()).collect();
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    /// First window edge strictly after `t`.
    pub fn next_breakpoint(&self, t: f64) -> Option<f64> {
        self.entries
            .iter()
            .flat_map(|e| [e.window.start, e.window.end])
            .filter(|&b| b > t && b.is_finite())
            .min_by(f64::total_cmp)
    }

    /// Checks Hermiticity on every constant piece of the schedule.
    pub fn validate(&self, dim: usize) -> Result<()> {
        let pts = self.breakpoints();
        let mut probes = vec![pts.first().map_or(0.0, |p| p - 1.0)];
        probes.extend(pts.iter().copied());
        for t in probes {
            self.matrix_at(t, dim)?;
        }
        Ok(())
    }
}

/// RK4 step size: 1/200 of the shortest period among the nonzero entries of `h`.
pub fn default_step(h: &Matrix) -> Option<f64> {
    let g = h.max_abs();
    (g > 0.0).then(|| 2.0 * PI / g / 200.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn couple_is_hermitian() {
        let mut s = HamiltonianSchedule::new();
        s.couple(0, 1, c(0.3, -0.7), Window::new(0.0, 1.0));
        let h = s.matrix_at(0.5, 2).unwrap();
        assert_eq!(h.get(0, 1), c(0.3, -0.7));
        assert_eq!(h.get(1, 0), c(0.3, 0.7));
        assert!(s.matrix_at(1.0, 2).unwrap().is_zero());
    }

    #[test]
    fn lone_entry_is_rejected() {
        let mut s = HamiltonianSchedule::new();
        s.push_entry(Coupling { row: 0, col: 1, strength: c(1.0, 0.0), window: Window::always() });
        assert!(matches!(s.matrix_at(0.0, 2), Err(Error::Config(_))));
        assert!(s.validate(2).is_err());
    }

    #[test]
    fn masking_one_direction_masks_both() {
        let mut s = HamiltonianSchedule::new();
        s.couple(0, 1, c(1.0, 0.0), Window::always());
        s.mask_pair(1, 0);
        assert!(s.is_masked(0, 1));
        assert!(s.matrix_at(0.0, 2).unwrap().is_zero());
    }

    #[test]
    fn end_window_truncates() {
        let mut s = HamiltonianSchedule::new();
        s.couple(0, 1, c(1.0, 0.0), Window::new(0.0, 5.0));
        s.end_window(1, 0, 2.0);
        assert!(s.matrix_at(2.5, 2).unwrap().is_zero());
        assert_eq!(s.next_breakpoint(0.5), Some(2.0));
    }

    #[test]
    fn step_is_two_hundredth_of_period() {
        let mut s = HamiltonianSchedule::new();
        s.couple(0, 1, c(20.0, 0.0), Window::always());
        let h = s.matrix_at(0.0, 2).unwrap();
        assert!((default_step(&h).unwrap() - 2.0 * PI / 20.0 / 200.0).abs() < 1e-15);
        assert_eq!(default_step(&Matrix::zeros(2)), None);
    }
}
