//! Sampled functions on a base × fiber tensor grid with finite-difference
//! derivatives. Every derivative shrinks the valid region by the stencil
//! half-width, and values outside it are NaN, so reads past the ghost
//! margin show up instead of passing silently.

use std::ops::Range;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Cells kept on each side of a non-periodic window: 2 for the fourth-order
/// first level plus 1 for the second-order composition.
pub const GHOST_MARGIN: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Axis {
    pub start: f64,
    pub step: f64,
    pub len: usize,
    pub periodic: bool,
}

impl Axis {
    /// `[a, b]` split into `cells` cells, padded with `margin` ghost nodes on
    /// each side.
    pub fn window(a: f64, b: f64, cells: usize, margin: usize) -> Result<Self> {
        if !(b > a) || cells == 0 {
            return Err(Error::InvalidInput(format!("bad window [{a}, {b}] with {cells} cells")));
        }
        let step = (b - a) / cells as f64;
        Ok(Self { start: a - margin as f64 * step, step, len: cells + 1 + 2 * margin, periodic: false })
    }

    /// `[0, period)` with `cells` nodes, wrapping around.
    pub fn periodic(period: f64, cells: usize) -> Result<Self> {
        if !(period > 0.0) || cells < 5 {
            return Err(Error::InvalidInput(format!("periodic axis needs period > 0 and >= 5 cells, got {period}, {cells}")));
        }
        Ok(Self { start: 0.0, step: period / cells as f64, len: cells, periodic: true })
    }

    /// A single node, for functions that do not vary along this axis.
    pub fn point(at: f64) -> Self {
        Self { start: at, step: 1.0, len: 1, periodic: false }
    }

    pub fn coord(&self, i: usize) -> f64 {
        self.start + i as f64 * self.step
    }

    pub fn full(&self) -> Range<usize> {
        0..self.len
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Base,
    Fiber,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stencil {
    Second,
    Fourth,
}

impl Stencil {
    fn first(self) -> &'static [f64] {
        match self {
            Stencil::Second => &[-0.5, 0.0, 0.5],
            Stencil::Fourth => &[1.0 / 12.0, -2.0 / 3.0, 0.0, 2.0 / 3.0, -1.0 / 12.0],
        }
    }

    fn second(self) -> &'static [f64] {
        match self {
            Stencil::Second => &[1.0, -2.0, 1.0],
            Stencil::Fourth => &[-1.0 / 12.0, 4.0 / 3.0, -2.5, 4.0 / 3.0, -1.0 / 12.0],
        }
    }
}

#[derive(Debug, Clone)]
pub struct GridFunction {
    base: Axis,
    fiber: Axis,
    values: Vec<f64>,
    valid_base: Range<usize>,
    valid_fiber: Range<usize>,
}

impl GridFunction {
    pub fn sample(base: Axis, fiber: Axis, f: impl Fn(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(base.len * fiber.len);
        for i in 0..base.len {
            let r = base.coord(i);
            for j in 0..fiber.len {
                values.push(f(r, fiber.coord(j)));
            }
        }
        Self { base, fiber, values, valid_base: base.full(), valid_fiber: fiber.full() }
    }

    pub fn base(&self) -> &Axis {
        &self.base
    }

    pub fn fiber(&self) -> &Axis {
        &self.fiber
    }

    pub fn valid(&self) -> (Range<usize>, Range<usize>) {
        (self.valid_base.clone(), self.valid_fiber.clone())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.fiber.len + j]
    }

    /// `(r, x, value)` at every valid node.
    pub fn valid_points(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.valid_base.clone().flat_map(move |i| {
            self.valid_fiber.clone().map(move |j| (self.base.coord(i), self.fiber.coord(j), self.get(i, j)))
        })
    }

    /// Restricts the valid region to nodes whose coordinates fall in the given
    /// closed boxes (with a small slack for rounding).
    pub fn restrict(&self, base: (f64, f64), fiber: Option<(f64, f64)>) -> Self {
        let pick = |axis: &Axis, range: &Range<usize>, lim: (f64, f64)| {
            let eps = 1e-9 * axis.step;
            let idx: Vec<usize> =
                range.clone().filter(|&i| axis.coord(i) >= lim.0 - eps && axis.coord(i) <= lim.1 + eps).collect();
            match (idx.first(), idx.last()) {
                (Some(&a), Some(&b)) => a..b + 1,
                _ => 0..0,
            }
        };
        let mut out = self.clone();
        out.valid_base = pick(&self.base, &self.valid_base, base);
        if let Some(lim) = fiber {
            out.valid_fiber = pick(&self.fiber, &self.valid_fiber, lim);
        }
        out.blank_invalid();
        out
    }

    fn blank_invalid(&mut self) {
        let nf = self.fiber.len;
        for i in 0..self.base.len {
            for j in 0..nf {
                if !self.valid_base.contains(&i) || !self.valid_fiber.contains(&j) {
                    self.values[i * nf + j] = f64::NAN;
                }
            }
        }
    }

    fn same_grid(&self, other: &Self) {
        assert!(self.base == other.base && self.fiber == other.fiber, "grid functions on different grids");
    }

    /// Pointwise combination with access to coordinates; valid regions intersect.
    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64, f64, f64) -> f64) -> Self {
        self.same_grid(other);
        let nf = self.fiber.len;
        let vb = self.valid_base.start.max(other.valid_base.start)..self.valid_base.end.min(other.valid_base.end);
        let vf = self.valid_fiber.start.max(other.valid_fiber.start)..self.valid_fiber.end.min(other.valid_fiber.end);
        let mut values = vec![f64::NAN; self.values.len()];
        for i in vb.clone() {
            let r = self.base.coord(i);
            for j in vf.clone() {
                values[i * nf + j] = f(r, self.fiber.coord(j), self.values[i * nf + j], other.values[i * nf + j]);
            }
        }
        Self { base: self.base, fiber: self.fiber, values, valid_base: vb, valid_fiber: vf }
    }

    pub fn map(&self, f: impl Fn(f64, f64, f64) -> f64) -> Self {
        self.zip_with(self, |r, x, a, _| f(r, x, a))
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, |_, _, a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, |_, _, a, b| a - b)
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.zip_with(other, |_, _, a, b| a * b)
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|_, _, a| c * a)
    }

    pub fn d1(&self, dir: Direction, stencil: Stencil) -> Self {
        self.apply_stencil(dir, stencil.first(), 1)
    }

    pub fn d2(&self, dir: Direction, stencil: Stencil) -> Self {
        self.apply_stencil(dir, stencil.second(), 2)
    }

    fn apply_stencil(&self, dir: Direction, coeffs: &[f64], power: i32) -> Self {
        let half = coeffs.len() / 2;
        let axis = match dir {
            Direction::Base => self.base,
            Direction::Fiber => self.fiber,
        };
        let valid = match dir {
            Direction::Base => &self.valid_base,
            Direction::Fiber => &self.valid_fiber,
        };
        assert!(axis.len > 1, "derivative along a single-node axis");
        let shrunk = if axis.periodic {
            valid.clone()
        } else if valid.len() > 2 * half {
            valid.start + half..valid.end - half
        } else {
            valid.start..valid.start
        };
        let scale = axis.step.powi(power);
        let nf = self.fiber.len;
        let n = axis.len as isize;
        let mut out = Self {
            base: self.base,
            fiber: self.fiber,
            values: vec![f64::NAN; self.values.len()],
            valid_base: self.valid_base.clone(),
            valid_fiber: self.valid_fiber.clone(),
        };
        match dir {
            Direction::Base => out.valid_base = shrunk.clone(),
            Direction::Fiber => out.valid_fiber = shrunk.clone(),
        }
        let (rows, cols) = (out.valid_base.clone(), out.valid_fiber.clone());
        for i in rows {
            for j in cols.clone() {
                let centre = match dir {
                    Direction::Base => i,
                    Direction::Fiber => j,
                } as isize;
                let mut acc = 0.0;
                for (k, c) in coeffs.iter().enumerate() {
                    if *c == 0.0 {
                        continue;
                    }
                    let mut at = centre + k as isize - half as isize;
                    if axis.periodic {
                        at = at.rem_euclid(n);
                    }
                    let at = at as usize;
                    let v = match dir {
                        Direction::Base => self.values[at * nf + j],
                        Direction::Fiber => self.values[i * nf + at],
                    };
                    acc += c * v;
                }
                out.values[i * nf + j] = acc / scale;
            }
        }
        out
    }

    /// Largest `|value|` over valid nodes; NaN inside the valid region
    /// propagates.
    pub fn max_abs(&self) -> f64 {
        self.valid_points().map(|p| p.2.abs()).fold(0.0, |a: f64, v| if v.is_nan() || a.is_nan() { f64::NAN } else { a.max(v) })
    }

    /// Smallest valid value with its coordinates.
    pub fn min_with_point(&self) -> Option<(f64, f64, f64)> {
        self.valid_points().fold(None, |acc, (r, x, v)| match acc {
            Some((_, _, m)) if m <= v => acc,
            _ => Some((r, x, v)),
        })
    }

    pub fn count_valid(&self) -> usize {
        self.valid_base.len() * self.valid_fiber.len()
    }
}

/// `c + Σ a_k cos(ω_k x) + b_k sin(ω_k x)` with exact derivatives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrigPoly {
    pub constant: f64,
    /// `(ω, a, b)` triples.
    pub terms: Vec<(f64, f64, f64)>,
}

impl TrigPoly {
    pub fn constant(c: f64) -> Self {
        Self { constant: c, terms: Vec::new() }
    }

    pub fn cos(omega: f64) -> Self {
        Self { constant: 0.0, terms: vec![(omega, 1.0, 0.0)] }
    }

    pub fn sin(omega: f64) -> Self {
        Self { constant: 0.0, terms: vec![(omega, 0.0, 1.0)] }
    }

    /// Frequencies `ω·k`, `k = 1..=degree`, with coefficients uniform in
    /// `[-1, 1]` divided by `k^decay`.
    pub fn random(rng: &mut impl Rng, degree: usize, omega: f64, decay: i32) -> Self {
        Self {
            constant: rng.random_range(-1.0..1.0),
            terms: (1..=degree)
                .map(|k| {
                    let s = (k as f64).powi(-decay);
                    (omega * k as f64, s * rng.random_range(-1.0..1.0), s * rng.random_range(-1.0..1.0))
                })
                .collect(),
        }
    }

    /// `(u, u′, u″)` at `x`.
    pub fn jet(&self, x: f64) -> [f64; 3] {
        let mut out = [self.constant, 0.0, 0.0];
        for &(w, a, b) in &self.terms {
            let (s, c) = (w * x).sin_cos();
            out[0] += a * c + b * s;
            out[1] += w * (b * c - a * s);
            out[2] -= w * w * (a * c + b * s);
        }
        out
    }

    pub fn value(&self, x: f64) -> f64 {
        self.jet(x)[0]
    }
}
