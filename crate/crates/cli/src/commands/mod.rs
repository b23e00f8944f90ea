pub mod be;
pub mod cd;
pub mod cone;
pub mod heat;
pub mod identity;
pub mod spectrum;
pub mod suspension;
pub mod weyl;

use std::f64::consts::PI;
use std::fs::File;
use std::path::Path;

use anyhow::{bail, Context};
use warpcone::gamma::{FiberGeometry, WarpedCone, Window};
use warpcone::mms::FiniteMMS;

pub fn load_space(path: &Path) -> anyhow::Result<FiniteMMS> {
    let file = File::open(path).with_context(|| format!("opening space {}", path.display()))?;
    FiniteMMS::from_json(file).with_context(|| format!("reading space {}", path.display()))
}

/// Largest nearest-neighbour distance, the resolution of a space.
pub fn resolution(space: &FiniteMMS) -> f64 {
    (0..space.len())
        .map(|i| {
            (0..space.len())
                .filter(|&j| j != i)
                .map(|j| space.dist(i, j))
                .fold(f64::INFINITY, f64::min)
        })
        .filter(|d| d.is_finite())
        .fold(0.0, f64::max)
}

/// The `(K, ν)` cone over the model fiber that carries `BE(ν−1, ν)`: the
/// unit circle for `ν = 1`, otherwise `(I₁, sin^{ν−1})`.
pub fn warped_setup(k: f64, nu: f64, cells: usize) -> anyhow::Result<(WarpedCone, Window)> {
    if !(nu >= 1.0) {
        bail!("the warped cone needs nu >= 1, got {nu}");
    }
    if cells < 4 {
        bail!("need at least 4 grid cells, got {cells}");
    }
    let base = if k > 0.0 {
        let l = PI / k.sqrt();
        (0.2 * l, 0.8 * l)
    } else {
        (0.6, 2.4)
    };
    let (fiber, fiber_window, fiber_cells) = if nu == 1.0 {
        let per_length = cells as f64 / (base.1 - base.0);
        (FiberGeometry::Circle { radius: 1.0 }, None, (2.0 * PI * per_length).round() as usize)
    } else {
        (FiberGeometry::Model { curvature: 1.0, nu: nu - 1.0 }, Some((0.7, 2.3)), cells)
    };
    Ok((
        WarpedCone { curvature: k, nu, fiber },
        Window { base, fiber: fiber_window, base_cells: cells, fiber_cells },
    ))
}
