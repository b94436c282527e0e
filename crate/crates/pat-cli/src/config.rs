//! Experiment files: sections `medium`, `grid`, `reversal`, `phantom`,
//! `pipeline` and `outputs` in the flat key/value format of
//! [`pat_core::kv`]. Lengths are in metres, times in seconds.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use pat_core::fdtd::{Backend, PhantomSpec};
use pat_core::kv::{parse_floats, KvDocument, KvSection};
use pat_core::medium::{Ball, MediumParams, Tau2Mode};
use pat_core::spectral::GridSpec;

use crate::error::{CliError, Result};
use crate::export::Format;

/// Grid size of the opt-in full-scale run.
pub const FULL_SCALE_N: usize = 1020;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Phantom,
    Forward,
    Shift,
    Reverse,
    Image,
    Enhance,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Phantom => "phantom",
            Stage::Forward => "forward",
            Stage::Shift => "shift",
            Stage::Reverse => "reverse",
            Stage::Image => "image",
            Stage::Enhance => "enhance",
        }
    }

    fn requires(self) -> Option<Stage> {
        match self {
            Stage::Phantom => None,
            Stage::Forward | Stage::Image => Some(Stage::Phantom),
            Stage::Shift | Stage::Reverse => Some(Stage::Forward),
            Stage::Enhance => Some(Stage::Reverse),
        }
    }
}

impl FromStr for Stage {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "phantom" => Stage::Phantom,
            "forward" => Stage::Forward,
            "shift" => Stage::Shift,
            "reverse" => Stage::Reverse,
            "image" => Stage::Image,
            "enhance" => Stage::Enhance,
            other => return Err(CliError::Config(format!("unknown stage `{other}`"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReversalSettings {
    pub t: Option<f64>,
    pub eps: Option<f64>,
    /// Explicit regularization area; `None` uses the threshold.
    pub d: Option<f64>,
    /// Damping of the enhancement solve; `None` uses the default.
    pub lambda: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Pipeline {
    pub stages: Vec<Stage>,
    pub backend: Backend,
    pub detectors: usize,
    /// Detector sampling step; `None` gives 200 intervals over `T`.
    pub sample_dt: Option<f64>,
    pub dt_factor: f64,
}

impl Pipeline {
    pub fn has(&self, s: Stage) -> bool {
        self.stages.contains(&s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outputs {
    pub dir: PathBuf,
    pub formats: Vec<Format>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    /// Medium of the first entry of `tau1s`.
    pub medium: MediumParams,
    pub tau1s: Vec<f64>,
    pub grid: GridSpec,
    pub full_scale: bool,
    pub omega: Ball,
    pub reversal: ReversalSettings,
    pub phantom: PhantomSpec,
    pub pipeline: Pipeline,
    pub outputs: Outputs,
}

fn section<'a>(doc: &'a KvDocument, name: &str, empty: &'a KvSection) -> &'a KvSection {
    doc.section(name).unwrap_or(empty)
}

fn list(sec: &KvSection, key: &str) -> Vec<String> {
    sec.get(key)
        .map(|e| {
            e.value
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .map(str::to_owned)
                .collect()
        })
        .unwrap_or_default()
}

fn boolean(sec: &KvSection, key: &str) -> Result<bool> {
    match sec.get(key).map(|e| e.value.as_str()) {
        None | Some("false") | Some("no") | Some("0") => Ok(false),
        Some("true") | Some("yes") | Some("1") => Ok(true),
        Some(v) => Err(CliError::Config(format!("[{}] {key}: expected a boolean, got `{v}`", sec.name))),
    }
}

impl ExperimentConfig {
    /// Reads a config file. A relative output directory is resolved against
    /// the directory of the file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base)
    }

    pub fn parse(text: &str, base: &Path) -> Result<Self> {
        let doc = KvDocument::parse(text)?;
        let empty = KvSection::default();

        let med = section(&doc, "medium", &empty);
        let c0 = med.parse("c0")?.unwrap_or(1500.0);
        let tau2_mode = match med.get("tau2").map(|e| e.value.as_str()) {
            None | Some("zero") | Some("0") => Tau2Mode::Zero,
            Some("tau1") => Tau2Mode::EqualTau1,
            Some(v) => return Err(CliError::Config(format!("[medium] tau2 must be `zero` or `tau1`, got `{v}`"))),
        };
        let alpha2 = med.parse("alpha2")?.unwrap_or(0.0);
        let tau1s = match med.get("tau1") {
            Some(e) => parse_floats(&e.value)?,
            None => vec![1e-9],
        };
        if tau1s.is_empty() {
            return Err(CliError::Config("[medium] tau1 is empty".into()));
        }
        let medium = MediumParams::new(c0, tau1s[0], tau2_mode, alpha2)?;
        for &t in &tau1s[1..] {
            medium.with_tau1(t)?;
        }

        let g = section(&doc, "grid", &empty);
        let full_scale = boolean(g, "full_scale")?;
        let n = if full_scale {
            FULL_SCALE_N
        } else {
            g.parse("n")?.unwrap_or(256)
        };
        let dx: f64 = g.require("dx")?;
        let grid = GridSpec::centered(2, n, dx)?;

        let ph = section(&doc, "phantom", &empty);
        let center = match ph.get("domain_center") {
            Some(e) => {
                let v = parse_floats(&e.value)?;
                if v.len() != 2 {
                    return Err(CliError::Config("[phantom] domain_center needs two numbers".into()));
                }
                [v[0], v[1], 0.0]
            }
            None => [0.0; 3],
        };
        let omega = Ball {
            center,
            radius: ph.require("domain_radius")?,
        };
        if !(omega.radius > 0.0) {
            return Err(CliError::Config("[phantom] domain_radius must be positive".into()));
        }
        let phantom = PhantomSpec::from_section(ph)?;

        let rv = section(&doc, "reversal", &empty);
        let reversal = ReversalSettings {
            t: rv.parse("T")?,
            eps: rv.parse("eps")?,
            d: rv.parse("D")?,
            lambda: rv.parse("lambda")?,
        };

        let pl = section(&doc, "pipeline", &empty);
        let stages = list(pl, "stages")
            .iter()
            .map(|s| s.parse())
            .collect::<Result<Vec<Stage>>>()?;
        for (i, s) in stages.iter().enumerate() {
            if stages[..i].contains(s) {
                return Err(CliError::Config(format!("stage `{}` listed twice", s.name())));
            }
            if let Some(req) = s.requires() {
                if !stages[..i].contains(&req) {
                    return Err(CliError::Config(format!(
                        "stage `{}` needs `{}` earlier in the pipeline",
                        s.name(),
                        req.name()
                    )));
                }
            }
        }
        let needs_t = stages.iter().any(|s| *s != Stage::Phantom);
        match reversal.t {
            Some(t) if !(t > 0.0) => return Err(CliError::Config("[reversal] T must be positive".into())),
            None if needs_t => return Err(CliError::Config("[reversal] T is required by the pipeline".into())),
            _ => {}
        }
        let backend = match pl.get("backend").map(|e| e.value.as_str()) {
            None | Some("fdtd") => Backend::Fdtd,
            Some("spectral") => Backend::Spectral,
            Some(v) => return Err(CliError::Config(format!("[pipeline] unknown backend `{v}`"))),
        };
        let pipeline = Pipeline {
            stages,
            backend,
            detectors: pl.parse("detectors")?.unwrap_or(64),
            sample_dt: pl.parse("sample_dt")?,
            dt_factor: pl.parse("dt_factor")?.unwrap_or(1.0),
        };

        let out = section(&doc, "outputs", &empty);
        let dir = PathBuf::from(out.get("dir").map_or("out", |e| e.value.as_str()));
        let dir = if dir.is_absolute() { dir } else { base.join(dir) };
        let mut formats = list(out, "formats")
            .iter()
            .map(|s| s.parse())
            .collect::<Result<Vec<Format>>>()?;
        if formats.is_empty() {
            formats.push(Format::Patgrid);
        }

        Ok(ExperimentConfig {
            medium,
            tau1s,
            grid,
            full_scale,
            omega,
            reversal,
            phantom,
            pipeline,
            outputs: Outputs { dir, formats },
        })
    }

    /// Media of all configured relaxation times.
    pub fn media(&self) -> Vec<MediumParams> {
        self.tau1s
            .iter()
            .map(|&t| self.medium.with_tau1(t).expect("validated at parse time"))
            .collect()
    }
}
