use std::fs::File;
use std::io::{BufWriter, Write};

use anyhow::Context;
use log::info;
use warpcone::mms::{circle_mms, cone, RadialGrid};

use super::load_space;
use crate::config::{resolve, ExperimentConfig};

/// Radial extent used when `K <= 0`, where the cone does not close.
const OPEN_EXTENT: f64 = std::f64::consts::PI;

/// Writes the `(K, N)`-cone over the `--input` fiber (default: the unit
/// circle with 64 atoms) to `--out`, or stdout.
pub fn run(mut cfg: ExperimentConfig) -> anyhow::Result<()> {
    let k = resolve(&mut cfg.k, 1.0);
    let n = resolve(&mut cfg.n, 1.0);
    let cells = resolve(&mut cfg.grid, 15);
    let fiber = match cfg.input.first() {
        Some(path) => load_space(path)?,
        None => circle_mms(64, 1.0)?,
    };
    let grid = if k > 0.0 {
        RadialGrid::model(k, n, cells)?
    } else {
        RadialGrid::new(k, n, cells, Some(OPEN_EXTENT))?
    };
    let space = cone(&fiber, k, n, &grid)?;
    match &cfg.out {
        Some(path) => {
            let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
            let mut w = BufWriter::new(file);
            space.to_json(&mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut w = stdout.lock();
            space.to_json(&mut w)?;
            writeln!(w)?;
        }
    }
    info!(
        "cone over {} fiber atoms: {} atoms, diameter {:.6}, radial step {:.6}",
        fiber.len(),
        space.len(),
        space.diameter(),
        grid.step()
    );
    Ok(())
}
