//! Report artifacts shared with the command-line tool: JSON documents,
//! RFC-4180 CSV tables, and a self-contained SVG histogram with a normal
//! overlay.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Record of one CLI run: parameters, artifact paths and the master seed.
/// Together with the crate version this is sufficient to reproduce the run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub parameters: BTreeMap<String, String>,
    /// Artifact name → path written.
    pub outputs: BTreeMap<String, String>,
    /// Wall-clock seconds; excluded from byte-reproducibility comparisons.
    pub timing_seconds: f64,
    pub seed: u64,
}

/// One histogram bin.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HistogramBin {
    pub left: f64,
    pub right: f64,
    pub count: usize,
    pub density: f64,
}

pub fn write_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Data(format!("serialization failed: {e}")))?;
    fs::write(path, text + "\n")?;
    Ok(())
}

/// Per-replication estimates as `index,estimate` rows.
pub fn write_replications_csv(path: impl AsRef<Path>, estimates: &[f64]) -> Result<()> {
    let mut f = fs::File::create(path)?;
    writeln!(f, "index,estimate")?;
    for (i, e) in estimates.iter().enumerate() {
        writeln!(f, "{i},{e:.12e}")?;
    }
    Ok(())
}

/// Scaled member pairs as `u_tilde,v_tilde` rows.
pub fn write_scatter_csv(path: impl AsRef<Path>, pairs: &[(f64, f64)]) -> Result<()> {
    let mut f = fs::File::create(path)?;
    writeln!(f, "u_tilde,v_tilde")?;
    for &(u, v) in pairs {
        writeln!(f, "{u:.12e},{v:.12e}")?;
    }
    Ok(())
}

/// Equal-width histogram over the data range.
pub fn histogram(values: &[f64], n_bins: usize) -> Result<Vec<HistogramBin>> {
    if values.is_empty() || n_bins == 0 {
        return Err(Error::Data("histogram needs data and at least one bin".into()));
    }
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let width = if hi > lo { (hi - lo) / n_bins as f64 } else { 1.0 };
    let mut counts = vec![0usize; n_bins];
    for &v in values {
        let idx = (((v - lo) / width) as usize).min(n_bins - 1);
        counts[idx] += 1;
    }
    let n = values.len() as f64;
    Ok(counts
        .into_iter()
        .enumerate()
        .map(|(i, count)| HistogramBin {
            left: lo + width * i as f64,
            right: lo + width * (i + 1) as f64,
            count,
            density: count as f64 / (n * width),
        })
        .collect())
}

pub fn write_histogram_csv(path: impl AsRef<Path>, bins: &[HistogramBin]) -> Result<()> {
    let mut f = fs::File::create(path)?;
    writeln!(f, "left,right,count,density")?;
    for b in bins {
        writeln!(f, "{:.12e},{:.12e},{},{:.12e}", b.left, b.right, b.count, b.density)?;
    }
    Ok(())
}

/// Histogram as a standalone SVG with a normal-density overlay from the
/// sample mean and SD.
pub fn write_histogram_svg(
    path: impl AsRef<Path>,
    bins: &[HistogramBin],
    mean: f64,
    sd: Option<f64>,
    title: &str,
) -> Result<()> {
    if bins.is_empty() {
        return Err(Error::Data("histogram SVG needs at least one bin".into()));
    }
    let (w, h) = (640.0, 480.0);
    let (ml, mr, mt, mb) = (60.0, 20.0, 40.0, 50.0);
    let (pw, ph) = (w - ml - mr, h - mt - mb);
    let x_lo = bins[0].left;
    let x_hi = bins[bins.len() - 1].right;
    let mut y_max = bins.iter().map(|b| b.density).fold(0.0, f64::max);
    if let Some(s) = sd {
        if s > 0.0 {
            y_max = y_max.max(1.0 / (s * (2.0 * std::f64::consts::PI).sqrt()));
        }
    }
    if y_max <= 0.0 {
        y_max = 1.0;
    }
    let sx = |x: f64| ml + (x - x_lo) / (x_hi - x_lo) * pw;
    let sy = |y: f64| mt + ph - y / (y_max * 1.05) * ph;
    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">{}</text>\n",
        w / 2.0,
        title
    ));
    for b in bins {
        let x = sx(b.left);
        let y = sy(b.density);
        let bw = sx(b.right) - x;
        let bh = mt + ph - y;
        svg.push_str(&format!(
            "<rect x=\"{x:.2}\" y=\"{y:.2}\" width=\"{bw:.2}\" height=\"{bh:.2}\" fill=\"#7aa6c2\" stroke=\"#41617a\" stroke-width=\"0.5\"/>\n"
        ));
    }
    if let Some(s) = sd {
        if s > 0.0 {
            let mut pts = Vec::new();
            for i in 0..=200 {
                let x = x_lo + (x_hi - x_lo) * i as f64 / 200.0;
                let z = (x - mean) / s;
                let d = (-0.5 * z * z).exp() / (s * (2.0 * std::f64::consts::PI).sqrt());
                pts.push(format!("{:.2},{:.2}", sx(x), sy(d)));
            }
            svg.push_str(&format!(
                "<polyline points=\"{}\" fill=\"none\" stroke=\"#b03030\" stroke-width=\"1.5\"/>\n",
                pts.join(" ")
            ));
        }
    }
    // axes
    svg.push_str(&format!(
        "<line x1=\"{ml}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        mt + ph,
        ml + pw,
        mt + ph
    ));
    svg.push_str(&format!("<line x1=\"{ml}\" y1=\"{mt}\" x2=\"{ml}\" y2=\"{}\" stroke=\"black\"/>\n", mt + ph));
    for i in 0..=4 {
        let x = x_lo + (x_hi - x_lo) * i as f64 / 4.0;
        svg.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">{:.4}</text>\n",
            sx(x),
            mt + ph + 18.0,
            x
        ));
    }
    svg.push_str("</svg>\n");
    fs::write(path, svg)?;
    Ok(())
}
