//! Static SVG line charts. Failures are logged and otherwise ignored.

use std::path::Path;

use log::warn;
use plotters::prelude::*;

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

impl Series {
    pub fn new(label: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Self { label: label.into(), points }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Linear,
    /// Both axes logarithmic; nonpositive points are dropped.
    LogLog,
}

fn bounds(series: &[Series], scale: Scale) -> Option<((f64, f64), (f64, f64))> {
    let pts = series.iter().flat_map(|s| s.points.iter()).filter(|(x, y)| {
        x.is_finite() && y.is_finite() && (scale == Scale::Linear || (*x > 0.0 && *y > 0.0))
    });
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        return None;
    }
    let pad = |a: f64, b: f64| match scale {
        Scale::Linear if a == b => (a - 1.0, b + 1.0),
        Scale::Linear => (a - 0.05 * (b - a), b + 0.05 * (b - a)),
        Scale::LogLog if a == b => (a / 2.0, b * 2.0),
        Scale::LogLog => (a / 1.2, b * 1.2),
    };
    Some((pad(x0, x1), pad(y0, y1)))
}

fn draw(path: &Path, title: &str, axes: (&str, &str), series: &[Series], scale: Scale) -> Result<(), String> {
    let ((x0, x1), (y0, y1)) = bounds(series, scale).ok_or("nothing to plot")?;
    let root = SVGBackend::new(path, (720, 450)).into_drawing_area();
    root.fill(&WHITE).map_err(|e| e.to_string())?;
    let mut builder = ChartBuilder::on(&root);
    builder.caption(title, ("sans-serif", 20)).margin(12).x_label_area_size(36).y_label_area_size(64);
    let colour = |i: usize| Palette99::pick(i).to_rgba();
    macro_rules! render {
        ($chart:expr) => {{
            let mut chart = $chart.map_err(|e| e.to_string())?;
            chart.configure_mesh().x_desc(axes.0).y_desc(axes.1).draw().map_err(|e| e.to_string())?;
            for (i, s) in series.iter().enumerate() {
                let pts = s.points.iter().copied().filter(|(x, y)| scale == Scale::Linear || (*x > 0.0 && *y > 0.0));
                chart
                    .draw_series(LineSeries::new(pts, colour(i)))
                    .map_err(|e| e.to_string())?
                    .label(s.label.clone())
                    .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 16, y)], colour(i)));
            }
            if series.len() > 1 {
                chart
                    .configure_series_labels()
                    .background_style(WHITE.mix(0.8))
                    .border_style(BLACK)
                    .draw()
                    .map_err(|e| e.to_string())?;
            }
        }};
    }
    match scale {
        Scale::Linear => render!(builder.build_cartesian_2d(x0..x1, y0..y1)),
        Scale::LogLog => render!(builder.build_cartesian_2d((x0..x1).log_scale(), (y0..y1).log_scale())),
    }
    root.present().map_err(|e| e.to_string())
}

/// Writes a chart to `path` when one is requested.
pub fn maybe_plot(path: Option<&Path>, title: &str, axes: (&str, &str), series: &[Series], scale: Scale) {
    if let Some(path) = path {
        if let Err(e) = draw(path, title, axes, series, scale) {
            warn!("plot {} not written: {e}", path.display());
        }
    }
}
