//! Scenario files: line-oriented `key = value` pairs under `[section]` headers.
//!
//! Every key has a default, so an empty file describes the reference
//! single-fracture setup. Problems are collected and reported together.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use crate::chemistry::{Heaviside, Kinetics, RateFn};
use crate::error::ConfigError;
use crate::mesh::{BoundaryTag, Mode};

#[derive(Debug, Clone, PartialEq)]
pub enum MeshSource {
    /// Unit square with `n` lattice squares per side, slit along a diagonal.
    Structured { n: usize, fracture: [[f64; 2]; 2] },
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeshConfig {
    pub source: MeshSource,
    pub mode: Mode,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhysicsConfig {
    pub phi_matrix: f64,
    pub phi_layer: f64,
    pub aperture: f64,
    pub thickness: f64,
    pub k_matrix: f64,
    pub k_fracture: f64,
    pub kappa_fracture: f64,
    pub k_layer: f64,
    pub kappa_layer: f64,
    pub viscosity: f64,
    pub f_matrix: f64,
    pub f_fracture: f64,
    pub f_layer: f64,
    pub d_matrix: f64,
    pub d_fracture: f64,
    pub delta_fracture: f64,
    pub d_layer: f64,
    pub delta_layer: f64,
    pub eta_matrix: f64,
    pub eta_fracture: f64,
    pub eta_layer: f64,
    pub upwind_weight: f64,
    pub porosity_rate_lag: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChemistryConfig {
    pub reaction: Kinetics,
    pub rate_fn: RateFn,
    pub heaviside: Heaviside,
    pub lambda: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryConfig {
    pub bottom: BoundaryTag,
    pub top: BoundaryTag,
    pub left: BoundaryTag,
    pub right: BoundaryTag,
    pub p_inflow: f64,
    pub p_outflow: f64,
    pub q_noflow: f64,
    pub p_fracture_inflow: f64,
    pub p_layer_inflow: f64,
    pub u_inflow: f64,
    pub u_outflow: f64,
    pub chi_noflow: f64,
    pub u_fracture_inflow: f64,
    pub u_layer_inflow: f64,
    pub u_matrix_init: f64,
    pub u_fracture_init: f64,
    pub u_layer_init: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimeConfig {
    pub t_final: f64,
    pub n_steps: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProfileLine {
    pub name: String,
    pub from: [f64; 2],
    pub to: [f64; 2],
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    pub directory: PathBuf,
    /// Fields are written every `interval` steps and at the end; 0 writes only the end.
    pub interval: usize,
    pub profiles: Vec<ProfileLine>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub mesh: MeshConfig,
    pub physics: PhysicsConfig,
    pub chemistry: ChemistryConfig,
    pub boundary: BoundaryConfig,
    pub time: TimeConfig,
    pub output: OutputConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            mesh: MeshConfig {
                source: MeshSource::Structured { n: 20, fracture: [[0.1, 0.0], [0.9, 0.8]] },
                mode: Mode::Multilayer,
            },
            physics: PhysicsConfig {
                phi_matrix: 0.2,
                phi_layer: 0.2,
                aperture: 1e-3,
                thickness: 1e-8,
                k_matrix: 1.0,
                k_fracture: 1e2,
                kappa_fracture: 1e2,
                k_layer: 1.0,
                kappa_layer: 1.0,
                viscosity: 1.0,
                f_matrix: 0.0,
                f_fracture: 0.0,
                f_layer: 0.0,
                d_matrix: 1e-8,
                d_fracture: 1e-6,
                delta_fracture: 1e-6,
                d_layer: 1e-6,
                delta_layer: 1e-6,
                eta_matrix: 0.0,
                eta_fracture: 0.0,
                eta_layer: 0.0,
                upwind_weight: 1.0,
                porosity_rate_lag: false,
            },
            chemistry: ChemistryConfig {
                reaction: Kinetics::Linear,
                rate_fn: RateFn::Identity,
                heaviside: Heaviside::Step,
                lambda: 100.0,
                delta: 0.1,
            },
            boundary: BoundaryConfig {
                bottom: BoundaryTag::Inflow,
                top: BoundaryTag::Outflow,
                left: BoundaryTag::NoFlow,
                right: BoundaryTag::NoFlow,
                p_inflow: 1.0,
                p_outflow: 0.0,
                q_noflow: 0.0,
                p_fracture_inflow: 0.1,
                p_layer_inflow: 0.1,
                u_inflow: 2.0,
                u_outflow: 0.0,
                chi_noflow: 0.0,
                u_fracture_inflow: 2.0,
                u_layer_inflow: 2.0,
                u_matrix_init: 0.0,
                u_fracture_init: 0.0,
                u_layer_init: 0.0,
            },
            time: TimeConfig { t_final: 0.2, n_steps: 100 },
            output: OutputConfig { directory: PathBuf::from("output"), interval: 0, profiles: Vec::new() },
        }
    }
}

const SECTIONS: [&str; 6] = ["mesh", "physics", "chemistry", "boundary", "time", "output"];

struct Entry {
    value: String,
    line: usize,
    used: bool,
}

/// Pulls typed values out of the parsed key table, recording every problem.
struct Reader {
    entries: BTreeMap<(String, String), Entry>,
    problems: Vec<String>,
}

impl Reader {
    fn take(&mut self, section: &str, key: &str) -> Option<(String, usize)> {
        let e = self.entries.get_mut(&(section.to_string(), key.to_string()))?;
        e.used = true;
        Some((e.value.clone(), e.line))
    }

    fn parsed<T>(&mut self, section: &str, key: &str, slot: &mut T, parse: impl Fn(&str) -> Option<T>, expected: &str) {
        if let Some((raw, line)) = self.take(section, key) {
            match parse(&raw) {
                Some(v) => *slot = v,
                None => self.problems.push(format!("line {line}: [{section}] {key} = {raw:?} is not {expected}")),
            }
        }
    }

    fn num(&mut self, section: &str, key: &str, slot: &mut f64) {
        self.parsed(section, key, slot, |s| s.parse::<f64>().ok().filter(|v| v.is_finite()), "a finite number");
    }

    fn count(&mut self, section: &str, key: &str, slot: &mut usize) {
        self.parsed(section, key, slot, |s| s.parse::<usize>().ok(), "a nonnegative integer");
    }

    fn flag(&mut self, section: &str, key: &str, slot: &mut bool) {
        self.parsed(
            section,
            key,
            slot,
            |s| match s {
                "0" | "false" => Some(false),
                "1" | "true" => Some(true),
                _ => None,
            },
            "0 or 1",
        );
    }

    fn tag(&mut self, key: &str, slot: &mut BoundaryTag) {
        self.parsed("boundary", key, slot, |s| BoundaryTag::parse(s).filter(|t| !t.is_slit()), "inflow, outflow or noflow");
    }
}

fn numbers<const N: usize>(s: &str) -> Option<[f64; N]> {
    let v: Vec<f64> = s.split_whitespace().map(|x| x.parse::<f64>().ok().filter(|v| v.is_finite())).collect::<Option<_>>()?;
    v.try_into().ok()
}

fn parse_profile(name: &str, s: &str) -> Option<ProfileLine> {
    let parts: Vec<&str> = s.split_whitespace().collect();
    if parts.len() != 5 {
        return None;
    }
    let c = numbers::<4>(&parts[..4].join(" "))?;
    Some(ProfileLine { name: name.to_string(), from: [c[0], c[1]], to: [c[2], c[3]], samples: parts[4].parse().ok()? })
}

fn kinetics_name(k: Kinetics) -> &'static str {
    match k {
        Kinetics::Linear => "linear",
        Kinetics::Precipitation => "precipitation",
    }
}

fn rate_fn_name(r: RateFn) -> &'static str {
    match r {
        RateFn::Identity => "identity",
        RateFn::Square => "square",
    }
}

fn heaviside_name(h: Heaviside) -> &'static str {
    match h {
        Heaviside::Step => "step",
        Heaviside::Ramp => "ramp",
    }
}

/// Parses and validates a scenario file, starting from the defaults.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let mut entries = BTreeMap::new();
    let mut problems = Vec::new();
    let mut section: Option<String> = None;
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        if let Some(name) = body.strip_prefix('[').and_then(|b| b.strip_suffix(']')) {
            let name = name.trim();
            if !SECTIONS.contains(&name) {
                problems.push(format!("line {line}: unknown section [{name}]"));
            }
            section = Some(name.to_string());
            continue;
        }
        let Some((key, value)) = body.split_once('=') else {
            problems.push(format!("line {line}: expected `key = value`, got {body:?}"));
            continue;
        };
        let Some(sec) = section.clone() else {
            problems.push(format!("line {line}: key {:?} outside of any section", key.trim()));
            continue;
        };
        let key = key.trim().to_string();
        let entry = Entry { value: value.trim().to_string(), line, used: false };
        if let Some(old) = entries.insert((sec.clone(), key.clone()), entry) {
            problems.push(format!("line {line}: [{sec}] {key} repeats line {}", old.line));
        }
    }

    let mut r = Reader { entries, problems };
    let mut c = ScenarioConfig::default();

    let mut n = 20;
    let mut fracture = [[0.1, 0.0], [0.9, 0.8]];
    if let MeshSource::Structured { n: n0, fracture: f0 } = &c.mesh.source {
        (n, fracture) = (*n0, *f0);
    }
    r.count("mesh", "n", &mut n);
    r.parsed("mesh", "fracture", &mut fracture, |s| numbers::<4>(s).map(|v| [[v[0], v[1]], [v[2], v[3]]]), "four numbers");
    let mut kind = "structured".to_string();
    r.parsed("mesh", "source", &mut kind, |s| ["structured", "file"].contains(&s).then(|| s.to_string()), "structured or file");
    let file = r.take("mesh", "file");
    c.mesh.source = match (kind.as_str(), file) {
        ("file", Some((path, _))) => MeshSource::File(PathBuf::from(path)),
        ("file", None) => {
            r.problems.push("[mesh] file is required when source = file".into());
            MeshSource::File(PathBuf::new())
        }
        (_, Some((_, line))) => {
            r.problems.push(format!("line {line}: [mesh] file is only used with source = file"));
            MeshSource::Structured { n, fracture }
        }
        _ => MeshSource::Structured { n, fracture },
    };
    r.parsed("mesh", "mode", &mut c.mesh.mode, Mode::parse, "fracture_only or multilayer");

    let p = &mut c.physics;
    for (key, slot) in [
        ("phi_matrix", &mut p.phi_matrix),
        ("phi_layer", &mut p.phi_layer),
        ("aperture", &mut p.aperture),
        ("thickness", &mut p.thickness),
        ("k_matrix", &mut p.k_matrix),
        ("k_fracture", &mut p.k_fracture),
        ("kappa_fracture", &mut p.kappa_fracture),
        ("k_layer", &mut p.k_layer),
        ("kappa_layer", &mut p.kappa_layer),
        ("viscosity", &mut p.viscosity),
        ("f_matrix", &mut p.f_matrix),
        ("f_fracture", &mut p.f_fracture),
        ("f_layer", &mut p.f_layer),
        ("d_matrix", &mut p.d_matrix),
        ("d_fracture", &mut p.d_fracture),
        ("delta_fracture", &mut p.delta_fracture),
        ("d_layer", &mut p.d_layer),
        ("delta_layer", &mut p.delta_layer),
        ("eta_matrix", &mut p.eta_matrix),
        ("eta_fracture", &mut p.eta_fracture),
        ("eta_layer", &mut p.eta_layer),
        ("upwind_weight", &mut p.upwind_weight),
    ] {
        r.num("physics", key, slot);
    }
    r.flag("physics", "porosity_rate_lag", &mut p.porosity_rate_lag);

    let ch = &mut c.chemistry;
    r.parsed(
        "chemistry",
        "reaction",
        &mut ch.reaction,
        |s| match s {
            "linear" => Some(Kinetics::Linear),
            "precipitation" => Some(Kinetics::Precipitation),
            _ => None,
        },
        "linear or precipitation",
    );
    r.parsed(
        "chemistry",
        "rate_fn",
        &mut ch.rate_fn,
        |s| match s {
            "identity" => Some(RateFn::Identity),
            "square" => Some(RateFn::Square),
            _ => None,
        },
        "identity or square",
    );
    r.parsed(
        "chemistry",
        "heaviside",
        &mut ch.heaviside,
        |s| match s {
            "step" => Some(Heaviside::Step),
            "ramp" => Some(Heaviside::Ramp),
            _ => None,
        },
        "step or ramp",
    );
    r.num("chemistry", "lambda", &mut ch.lambda);
    r.num("chemistry", "delta", &mut ch.delta);

    let b = &mut c.boundary;
    r.tag("bottom", &mut b.bottom);
    r.tag("top", &mut b.top);
    r.tag("left", &mut b.left);
    r.tag("right", &mut b.right);
    for (key, slot) in [
        ("p_inflow", &mut b.p_inflow),
        ("p_outflow", &mut b.p_outflow),
        ("q_noflow", &mut b.q_noflow),
        ("p_fracture_inflow", &mut b.p_fracture_inflow),
        ("p_layer_inflow", &mut b.p_layer_inflow),
        ("u_inflow", &mut b.u_inflow),
        ("u_outflow", &mut b.u_outflow),
        ("chi_noflow", &mut b.chi_noflow),
        ("u_fracture_inflow", &mut b.u_fracture_inflow),
        ("u_layer_inflow", &mut b.u_layer_inflow),
        ("u_matrix_init", &mut b.u_matrix_init),
        ("u_fracture_init", &mut b.u_fracture_init),
        ("u_layer_init", &mut b.u_layer_init),
    ] {
        r.num("boundary", key, slot);
    }

    r.num("time", "t_final", &mut c.time.t_final);
    r.count("time", "n_steps", &mut c.time.n_steps);

    let mut dir = c.output.directory.to_string_lossy().into_owned();
    r.parsed("output", "directory", &mut dir, |s| (!s.is_empty()).then(|| s.to_string()), "a path");
    c.output.directory = PathBuf::from(dir);
    r.count("output", "interval", &mut c.output.interval);
    let profile_keys: Vec<String> = r
        .entries
        .keys()
        .filter(|(s, k)| s == "output" && k.starts_with("profile_"))
        .map(|(_, k)| k.clone())
        .collect();
    for key in profile_keys {
        let name = key["profile_".len()..].to_string();
        let mut line = None;
        r.parsed("output", &key, &mut line, |s| parse_profile(&name, s).map(Some), "`x0 y0 x1 y1 samples`");
        c.output.profiles.extend(line);
    }

    for ((section, key), e) in &r.entries {
        if !e.used && SECTIONS.contains(&section.as_str()) {
            r.problems.push(format!("line {}: unknown key [{section}] {key}", e.line));
        }
    }
    r.problems.extend(validate(&c));
    if r.problems.is_empty() {
        Ok(c)
    } else {
        Err(ConfigError { problems: r.problems })
    }
}

/// Range checks that do not need the mesh.
pub fn validate(c: &ScenarioConfig) -> Vec<String> {
    let mut out = Vec::new();
    let mut need = |ok: bool, msg: String| {
        if !ok {
            out.push(msg);
        }
    };
    let p = &c.physics;
    for (name, v) in [("phi_matrix", p.phi_matrix), ("phi_layer", p.phi_layer)] {
        need(v > 0.0 && v <= 1.0, format!("[physics] {name} = {v} must lie in (0, 1]"));
    }
    for (name, v) in [
        ("aperture", p.aperture),
        ("thickness", p.thickness),
        ("k_matrix", p.k_matrix),
        ("k_fracture", p.k_fracture),
        ("kappa_fracture", p.kappa_fracture),
        ("k_layer", p.k_layer),
        ("kappa_layer", p.kappa_layer),
        ("viscosity", p.viscosity),
    ] {
        need(v > 0.0, format!("[physics] {name} = {v} must be positive"));
    }
    for (name, v) in [
        ("d_matrix", p.d_matrix),
        ("d_fracture", p.d_fracture),
        ("delta_fracture", p.delta_fracture),
        ("d_layer", p.d_layer),
        ("delta_layer", p.delta_layer),
        ("eta_matrix", p.eta_matrix),
        ("eta_fracture", p.eta_fracture),
        ("eta_layer", p.eta_layer),
    ] {
        need(v >= 0.0, format!("[physics] {name} = {v} must be nonnegative"));
    }
    need((0.5..=1.0).contains(&p.upwind_weight), format!("[physics] upwind_weight = {} must lie in [0.5, 1]", p.upwind_weight));
    need(c.chemistry.lambda >= 0.0, format!("[chemistry] lambda = {} must be nonnegative", c.chemistry.lambda));
    need(c.chemistry.delta > 0.0, format!("[chemistry] delta = {} must be positive", c.chemistry.delta));
    need(
        !(c.mesh.mode == Mode::Multilayer && c.chemistry.reaction == Kinetics::Precipitation),
        "layer growth is only modelled for linear kinetics; use mode = fracture_only with reaction = precipitation".into(),
    );
    need(c.time.n_steps >= 1, "[time] n_steps must be at least 1".into());
    need(c.time.t_final > 0.0, format!("[time] t_final = {} must be positive", c.time.t_final));
    if let MeshSource::Structured { n, fracture } = &c.mesh.source {
        need(*n >= 1, "[mesh] n must be at least 1".into());
        let inside = fracture.iter().flatten().all(|v| (0.0..=1.0).contains(v));
        need(inside, "[mesh] fracture endpoints must lie in the unit square".into());
    }
    for line in &c.output.profiles {
        need(line.samples >= 2, format!("[output] profile_{} needs at least 2 samples", line.name));
        need(line.from != line.to, format!("[output] profile_{} has coincident endpoints", line.name));
    }
    out
}

/// Writes every key, so that `parse_config(&serialize_config(c)) == c`.
pub fn serialize_config(c: &ScenarioConfig) -> String {
    let mut s = String::new();
    let kv = |s: &mut String, k: &str, v: String| {
        let _ = writeln!(s, "{k} = {v}");
    };
    s.push_str("[mesh]\n");
    match &c.mesh.source {
        MeshSource::Structured { n, fracture } => {
            kv(&mut s, "source", "structured".into());
            kv(&mut s, "n", n.to_string());
            kv(&mut s, "fracture", format!("{:?} {:?} {:?} {:?}", fracture[0][0], fracture[0][1], fracture[1][0], fracture[1][1]));
        }
        MeshSource::File(path) => {
            kv(&mut s, "source", "file".into());
            kv(&mut s, "file", path.display().to_string());
        }
    }
    kv(&mut s, "mode", c.mesh.mode.as_str().into());

    let p = &c.physics;
    s.push_str("\n[physics]\n");
    for (k, v) in [
        ("phi_matrix", p.phi_matrix),
        ("phi_layer", p.phi_layer),
        ("aperture", p.aperture),
        ("thickness", p.thickness),
        ("k_matrix", p.k_matrix),
        ("k_fracture", p.k_fracture),
        ("kappa_fracture", p.kappa_fracture),
        ("k_layer", p.k_layer),
        ("kappa_layer", p.kappa_layer),
        ("viscosity", p.viscosity),
        ("f_matrix", p.f_matrix),
        ("f_fracture", p.f_fracture),
        ("f_layer", p.f_layer),
        ("d_matrix", p.d_matrix),
        ("d_fracture", p.d_fracture),
        ("delta_fracture", p.delta_fracture),
        ("d_layer", p.d_layer),
        ("delta_layer", p.delta_layer),
        ("eta_matrix", p.eta_matrix),
        ("eta_fracture", p.eta_fracture),
        ("eta_layer", p.eta_layer),
        ("upwind_weight", p.upwind_weight),
    ] {
        kv(&mut s, k, format!("{v:?}"));
    }
    kv(&mut s, "porosity_rate_lag", u8::from(p.porosity_rate_lag).to_string());

    let ch = &c.chemistry;
    s.push_str("\n[chemistry]\n");
    kv(&mut s, "reaction", kinetics_name(ch.reaction).into());
    kv(&mut s, "rate_fn", rate_fn_name(ch.rate_fn).into());
    kv(&mut s, "heaviside", heaviside_name(ch.heaviside).into());
    kv(&mut s, "lambda", format!("{:?}", ch.lambda));
    kv(&mut s, "delta", format!("{:?}", ch.delta));

    let b = &c.boundary;
    s.push_str("\n[boundary]\n");
    for (k, t) in [("bottom", b.bottom), ("top", b.top), ("left", b.left), ("right", b.right)] {
        kv(&mut s, k, t.as_str().into());
    }
    for (k, v) in [
        ("p_inflow", b.p_inflow),
        ("p_outflow", b.p_outflow),
        ("q_noflow", b.q_noflow),
        ("p_fracture_inflow", b.p_fracture_inflow),
        ("p_layer_inflow", b.p_layer_inflow),
        ("u_inflow", b.u_inflow),
        ("u_outflow", b.u_outflow),
        ("chi_noflow", b.chi_noflow),
        ("u_fracture_inflow", b.u_fracture_inflow),
        ("u_layer_inflow", b.u_layer_inflow),
        ("u_matrix_init", b.u_matrix_init),
        ("u_fracture_init", b.u_fracture_init),
        ("u_layer_init", b.u_layer_init),
    ] {
        kv(&mut s, k, format!("{v:?}"));
    }

    s.push_str("\n[time]\n");
    kv(&mut s, "t_final", format!("{:?}", c.time.t_final));
    kv(&mut s, "n_steps", c.time.n_steps.to_string());

    s.push_str("\n[output]\n");
    kv(&mut s, "directory", c.output.directory.display().to_string());
    kv(&mut s, "interval", c.output.interval.to_string());
    for l in &c.output.profiles {
        kv(
            &mut s,
            &format!("profile_{}", l.name),
            format!("{:?} {:?} {:?} {:?} {}", l.from[0], l.from[1], l.to[0], l.to[1], l.samples),
        );
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn empty_text_gives_defaults() {
        let c = parse_config("").unwrap();
        assert_eq!(c, ScenarioConfig::default());
        assert_eq!(c.chemistry.lambda, 100.0);
        assert_eq!(c.chemistry.delta, 0.1);
        assert_eq!(c.physics.aperture, 1e-3);
    }

    #[test]
    fn overrides_and_comments() {
        let c = parse_config("# case\n[mesh]\nmode = fracture_only  # no layers\nn = 10\n[physics]\neta_matrix = 5e-2\n").unwrap();
        assert_eq!(c.mesh.mode, Mode::FractureOnly);
        assert_eq!(c.physics.eta_matrix, 0.05);
        assert!(matches!(c.mesh.source, MeshSource::Structured { n: 10, .. }));
    }

    #[test]
    fn mode_round_trips() {
        let mut c = ScenarioConfig::default();
        c.mesh.mode = Mode::FractureOnly;
        assert_eq!(parse_config(&serialize_config(&c)).unwrap(), c);
    }

    #[test]
    fn zero_steps_rejected() {
        let e = parse_config("[time]\nn_steps = 0\n").unwrap_err();
        assert!(e.problems[0].contains("n_steps"));
    }

    #[test]
    fn all_problems_reported() {
        let text = "[physics]\nphi_matrix = abc\nbogus = 1\n[chemistry]\nrate_fn = cube\n[nowhere]\nx = 1\n[mesh]\nsource = file\n";
        let e = parse_config(text).unwrap_err();
        let all = e.problems.join("\n");
        for needle in ["phi_matrix", "bogus", "rate_fn", "[nowhere]", "file is required"] {
            assert!(all.contains(needle), "missing {needle} in\n{all}");
        }
    }

    #[test]
    fn precipitation_needs_fracture_only() {
        assert!(parse_config("[chemistry]\nreaction = precipitation\n").is_err());
        assert!(parse_config("[mesh]\nmode = fracture_only\n[chemistry]\nreaction = precipitation\nrate_fn = square\n").is_ok());
    }

    #[test]
    fn profiles_and_file_source() {
        let c = parse_config("[mesh]\nsource = file\nfile = grids/a.mesh\n[output]\nprofile_l1 = 0 1 1 0 401\n").unwrap();
        assert_eq!(c.mesh.source, MeshSource::File("grids/a.mesh".into()));
        assert_eq!(c.output.profiles, vec![ProfileLine { name: "l1".into(), from: [0.0, 1.0], to: [1.0, 0.0], samples: 401 }]);
        assert_eq!(parse_config(&serialize_config(&c)).unwrap(), c);
    }

    proptest! {
        #[test]
        fn serialize_parse_round_trip(
            n in 1usize..50,
            phi in 1e-6f64..1.0,
            eps in 1e-12f64..1.0,
            lambda in 0.0f64..1e4,
            eta in 0.0f64..1.0,
            p in -10.0f64..10.0,
            steps in 1usize..1000,
            tf in 1e-6f64..10.0,
            fracture_only: bool,
            lag: bool,
        ) {
            let mut c = ScenarioConfig::default();
            c.mesh.source = MeshSource::Structured { n, fracture: [[0.0, 0.0], [1.0, 1.0]] };
            c.mesh.mode = if fracture_only { Mode::FractureOnly } else { Mode::Multilayer };
            c.physics.phi_matrix = phi;
            c.physics.thickness = eps;
            c.physics.eta_layer = eta;
            c.physics.porosity_rate_lag = lag;
            c.chemistry.lambda = lambda;
            c.boundary.p_inflow = p;
            c.time = TimeConfig { t_final: tf, n_steps: steps };
            prop_assert_eq!(parse_config(&serialize_config(&c)).unwrap(), c);
        }
    }
}
