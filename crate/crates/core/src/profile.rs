//! Piecewise-constant sampling of cell fields along straight lines.

use crate::error::Error;
use crate::mesh::{MixedDimMesh, Side};
use crate::transport::{Capacities, Concentrations};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subdomain {
    Matrix,
    Fracture,
    Layer(Side),
}

impl Subdomain {
    pub fn as_str(self) -> &'static str {
        match self {
            Subdomain::Matrix => "matrix",
            Subdomain::Fracture => "fracture",
            Subdomain::Layer(Side::Plus) => "layer_plus",
            Subdomain::Layer(Side::Minus) => "layer_minus",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "matrix" => Subdomain::Matrix,
            "fracture" => Subdomain::Fracture,
            "layer_plus" => Subdomain::Layer(Side::Plus),
            "layer_minus" => Subdomain::Layer(Side::Minus),
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileSample {
    /// Distance from the unclipped start point.
    pub arc: f64,
    pub x: f64,
    pub y: f64,
    pub subdomain: Subdomain,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LineProfile {
    pub from: [f64; 2],
    pub to: [f64; 2],
    /// Ordered by arc length; lower-dimensional rows share the arc of the
    /// matrix sample they sit on, or mark a crossing of the fracture.
    pub samples: Vec<ProfileSample>,
    /// Arc length of each crossing of the line with the fracture.
    pub crossings: Vec<f64>,
}

pub const CSV_HEADER: &str = "arc_length,x,y,subdomain,value";

impl LineProfile {
    pub fn to_csv(&self) -> String {
        let mut s = String::from(CSV_HEADER);
        s.push('\n');
        for p in &self.samples {
            s.push_str(&format!("{:.16e},{:.16e},{:.16e},{},{:.16e}\n", p.arc, p.x, p.y, p.subdomain.as_str(), p.value));
        }
        s
    }

    /// Parses the output of [`LineProfile::to_csv`]; endpoints and crossings are not stored.
    pub fn samples_from_csv(text: &str) -> Result<Vec<ProfileSample>, Error> {
        let mut lines = text.lines();
        if lines.next() != Some(CSV_HEADER) {
            return Err(Error::Sample(format!("profile CSV must start with `{CSV_HEADER}`")));
        }
        lines
            .enumerate()
            .map(|(k, line)| {
                let bad = || Error::Sample(format!("profile CSV line {}: {line:?}", k + 2));
                let f: Vec<&str> = line.split(',').collect();
                if f.len() != 5 {
                    return Err(bad());
                }
                let num = |s: &str| s.parse::<f64>().map_err(|_| bad());
                Ok(ProfileSample {
                    arc: num(f[0])?,
                    x: num(f[1])?,
                    y: num(f[2])?,
                    subdomain: Subdomain::parse(f[3]).ok_or_else(bad)?,
                    value: num(f[4])?,
                })
            })
            .collect()
    }

    /// Distance from `crossing` to where the profile first drops below `cutoff`,
    /// walking towards larger (`forward`) or smaller arc. Lower-dimensional rows
    /// take precedence over the matrix value at the same arc. The position is
    /// interpolated linearly between the last sample above and the first below.
    pub fn cutoff_distance(&self, crossing: f64, forward: bool, cutoff: f64) -> Option<f64> {
        let mut rows: Vec<(f64, f64)> = Vec::new();
        for (k, p) in self.samples.iter().enumerate() {
            let shadowed = self.samples.iter().enumerate().any(|(j, q)| {
                j != k && q.arc == p.arc && p.subdomain == Subdomain::Matrix && q.subdomain != Subdomain::Matrix
            });
            let ahead = if forward { p.arc >= crossing } else { p.arc <= crossing };
            if ahead && !shadowed {
                rows.push(((p.arc - crossing).abs(), p.value));
            }
        }
        rows.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (mut d0, mut v0) = rows.first().copied()?;
        if v0 < cutoff {
            return Some(d0);
        }
        for &(d, v) in &rows[1..] {
            if v < cutoff {
                return Some(d0 + (d - d0) * (v0 - cutoff) / (v0 - v));
            }
            (d0, v0) = (d, v);
        }
        None
    }
}

/// Clips the segment to the box `[lo, hi]`; returns the parameter range in `[0, 1]`.
fn clip(p0: [f64; 2], p1: [f64; 2], lo: [f64; 2], hi: [f64; 2]) -> Option<(f64, f64)> {
    let (mut t0, mut t1) = (0.0f64, 1.0f64);
    for a in 0..2 {
        let d = p1[a] - p0[a];
        if d == 0.0 {
            if p0[a] < lo[a] || p0[a] > hi[a] {
                return None;
            }
            continue;
        }
        let (mut s0, mut s1) = ((lo[a] - p0[a]) / d, (hi[a] - p0[a]) / d);
        if s0 > s1 {
            std::mem::swap(&mut s0, &mut s1);
        }
        t0 = t0.max(s0);
        t1 = t1.min(s1);
    }
    (t0 <= t1).then_some((t0, t1))
}

/// Samples `values` at `n_samples` equispaced points of the segment `p0 p1`
/// clipped to the bounding box of the matrix. Points that fall inside the
/// fracture or layer band (widths from `geometry`) also report the
/// lower-dimensional value, and every crossing of the line with the fracture
/// adds one row per lower-dimensional subdomain.
pub fn sample_line(
    mesh: &MixedDimMesh,
    values: &Concentrations,
    geometry: &Capacities,
    p0: [f64; 2],
    p1: [f64; 2],
    n_samples: usize,
) -> Result<LineProfile, Error> {
    if p0 == p1 {
        return Err(Error::Sample("profile endpoints coincide".into()));
    }
    if n_samples < 2 {
        return Err(Error::Sample(format!("a profile needs at least 2 samples, got {n_samples}")));
    }
    let m = &mesh.matrix;
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for p in &m.nodes {
        for a in 0..2 {
            lo[a] = lo[a].min(p[a]);
            hi[a] = hi[a].max(p[a]);
        }
    }
    let outside = || Error::Sample(format!("segment ({}, {}) to ({}, {}) lies outside the domain", p0[0], p0[1], p1[0], p1[1]));
    let (t0, t1) = clip(p0, p1, lo, hi).ok_or_else(outside)?;
    let length = ((p1[0] - p0[0]).powi(2) + (p1[1] - p0[1]).powi(2)).sqrt();
    let dir = [(p1[0] - p0[0]) / length, (p1[1] - p0[1]) / length];
    let at = |t: f64| [p0[0] + t * (p1[0] - p0[0]), p0[1] + t * (p1[1] - p0[1])];

    let grid = &mesh.fracture;
    let layered = values.layers.is_some() && geometry.thickness.is_some();
    let layer_value = |s: Side, i: usize| values.layers.as_ref().map(|l| l[s.index()][i]);
    let thickness = |s: Side, i: usize| geometry.thickness.as_ref().map_or(0.0, |t| t[s.index()][i]);
    // signed normal offset and segment index of the band containing x, if any
    let band = |x: [f64; 2]| -> Option<(usize, f64)> {
        (0..grid.n_segments()).find_map(|i| {
            let a = grid.points[i];
            let (t, n) = (grid.tangents[i], grid.normals[i]);
            let rel = [x[0] - a[0], x[1] - a[1]];
            let s = rel[0] * t[0] + rel[1] * t[1];
            let d = rel[0] * n[0] + rel[1] * n[1];
            let half = geometry.aperture[i] / 2.0;
            let side = if d >= 0.0 { Side::Plus } else { Side::Minus };
            let reach = half + if layered { thickness(side, i) } else { 0.0 };
            ((0.0..=grid.lengths[i]).contains(&s) && d.abs() <= reach).then_some((i, d))
        })
    };

    let mut samples = Vec::new();
    for k in 0..n_samples {
        let t = t0 + (t1 - t0) * k as f64 / (n_samples - 1) as f64;
        let x = at(t);
        let Some(cell) = m.locate(x) else { continue };
        let arc = t * length;
        samples.push(ProfileSample { arc, x: x[0], y: x[1], subdomain: Subdomain::Matrix, value: values.matrix[cell] });
        if let Some((i, d)) = band(x) {
            let row = |subdomain, value| ProfileSample { arc, x: x[0], y: x[1], subdomain, value };
            if d.abs() <= geometry.aperture[i] / 2.0 {
                samples.push(row(Subdomain::Fracture, values.fracture[i]));
            } else {
                let side = if d > 0.0 { Side::Plus } else { Side::Minus };
                if let Some(v) = layer_value(side, i) {
                    samples.push(row(Subdomain::Layer(side), v));
                }
            }
        }
    }
    if samples.is_empty() {
        return Err(outside());
    }

    let mut crossings = Vec::new();
    for i in 0..grid.n_segments() {
        let a = grid.points[i];
        let n = grid.normals[i];
        let dn = dir[0] * n[0] + dir[1] * n[1];
        if dn.abs() < 1e-12 {
            continue;
        }
        // arc where the line meets the centerline of segment i
        let arc = ((a[0] - p0[0]) * n[0] + (a[1] - p0[1]) * n[1]) / dn;
        let x = [p0[0] + arc * dir[0], p0[1] + arc * dir[1]];
        let s = (x[0] - a[0]) * grid.tangents[i][0] + (x[1] - a[1]) * grid.tangents[i][1];
        if !(0.0..grid.lengths[i]).contains(&s) || arc < t0 * length || arc > t1 * length {
            continue;
        }
        crossings.push(arc);
        samples.push(ProfileSample { arc, x: x[0], y: x[1], subdomain: Subdomain::Fracture, value: values.fracture[i] });
        for side in Side::BOTH {
            let Some(v) = layer_value(side, i) else { continue };
            let sign = if side == Side::Plus { 1.0 } else { -1.0 };
            let offset = sign * (geometry.aperture[i] / 2.0 + thickness(side, i) / 2.0) / dn;
            let c = arc + offset;
            let y = [p0[0] + c * dir[0], p0[1] + c * dir[1]];
            samples.push(ProfileSample { arc: c, x: y[0], y: y[1], subdomain: Subdomain::Layer(side), value: v });
        }
    }
    samples.sort_by(|a, b| a.arc.total_cmp(&b.arc));
    Ok(LineProfile { from: p0, to: p1, samples, crossings })
}
