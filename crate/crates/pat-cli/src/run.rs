//! Execution of one configured experiment per relaxation time.

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use pat_core::fdtd::{cfl_dt, image_i_dt, Backend, FdtdConfig};
use pat_core::inverse::{default_lambda, solve_operator_eq, OperatorSymbols};
use pat_core::medium::{apply_time_shift, time_shift_t1, wavefront_speed, MediumParams, ShiftDirection};
use pat_core::propagation::{pat_forward, time_reverse_f, Acquisition, PatData, ReversalConfig};
use pat_core::spectral::{build_symbols, required_d, RealField};
use pat_core::PatError;

use crate::config::{ExperimentConfig, Stage};
use crate::error::{CliError, Result};
use crate::export::{export_grid, export_series};
use crate::manifest::Manifest;

pub const MANIFEST_FILE: &str = "manifest.txt";
pub const ERROR_FILE: &str = "error.txt";

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub dir: PathBuf,
    pub tau1: f64,
    pub blow_up: bool,
}

/// Failure of one run: the stage that failed (if any) and the error.
#[derive(Debug)]
pub struct RunFailure {
    pub dir: PathBuf,
    pub stage: Option<Stage>,
    pub error: CliError,
}

impl RunFailure {
    /// Machine-readable record, also written to `error.txt`.
    pub fn record(&self) -> String {
        let mut s = String::from("[error]\n");
        let _ = writeln!(s, "kind = {}", self.error.kind());
        let _ = writeln!(s, "stage = {}", self.stage.map_or("setup", Stage::name));
        let _ = writeln!(s, "exit_code = {}", self.error.exit_code());
        let _ = writeln!(s, "message = {}", self.error.to_string().replace('\n', " "));
        s
    }
}

pub type RunResult = std::result::Result<RunSummary, RunFailure>;

/// Output directory of one relaxation time. Multi-run invocations get one
/// subdirectory per value.
pub fn run_dir(base: &Path, tau1: f64, multi: bool) -> PathBuf {
    if multi {
        base.join(format!("tau1_{tau1:e}"))
    } else {
        base.to_path_buf()
    }
}

/// Runs every configured relaxation time on at most `threads` workers.
/// Results come back in the order of `cfg.tau1s`.
pub fn run_all(cfg: &ExperimentConfig, threads: usize) -> Vec<RunResult> {
    let media = cfg.media();
    let multi = media.len() > 1;
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<RunResult>>> = Mutex::new((0..media.len()).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..threads.clamp(1, media.len()) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(m) = media.get(i) else { break };
                let r = run_one(cfg, m, &run_dir(&cfg.outputs.dir, m.tau1, multi));
                results.lock().expect("worker panicked")[i] = Some(r);
            });
        }
    });
    results
        .into_inner()
        .expect("worker panicked")
        .into_iter()
        .map(|r| r.expect("every index is visited"))
        .collect()
}

/// Runs the pipeline for medium `m` into `dir`. The manifest is written in
/// every case; failures additionally leave `error.txt`.
pub fn run_one(cfg: &ExperimentConfig, m: &MediumParams, dir: &Path) -> RunResult {
    let fail = |stage, error| RunFailure {
        dir: dir.to_path_buf(),
        stage,
        error,
    };
    fs::create_dir_all(dir).map_err(|e| fail(None, CliError::io(dir, e)))?;
    let mut run = Run {
        cfg,
        m: *m,
        dir,
        manifest: Manifest::default(),
        outputs: Vec::new(),
        phi: None,
        data: None,
        f1: None,
        blow_up: false,
    };
    run.describe();
    let mut failed = None;
    for &stage in &cfg.pipeline.stages {
        if let Err(e) = run.stage(stage) {
            failed = Some((stage, e));
            break;
        }
    }
    let status = match (&failed, run.blow_up) {
        (Some(_), _) => "failed",
        (None, true) => "blow_up",
        (None, false) => "ok",
    };
    run.manifest.set("run", "status", status);
    if let Some((stage, _)) = &failed {
        run.manifest.set("run", "failed_stage", stage.name());
    }
    let names: Vec<String> = run
        .outputs
        .iter()
        .filter_map(|p| p.file_name().map(|f| f.to_string_lossy().into_owned()))
        .collect();
    run.manifest.set("outputs", "files", names.join(", "));
    let written = run.manifest.write(&dir.join(MANIFEST_FILE));
    match failed {
        Some((stage, error)) => {
            let f = fail(Some(stage), error);
            // The record matters more than a second I/O error.
            let _ = fs::write(dir.join(ERROR_FILE), f.record());
            Err(f)
        }
        None => {
            written.map_err(|e| fail(None, e))?;
            Ok(RunSummary {
                dir: dir.to_path_buf(),
                tau1: m.tau1,
                blow_up: run.blow_up,
            })
        }
    }
}

struct Run<'a> {
    cfg: &'a ExperimentConfig,
    m: MediumParams,
    dir: &'a Path,
    manifest: Manifest,
    outputs: Vec<PathBuf>,
    phi: Option<RealField>,
    data: Option<PatData>,
    f1: Option<RealField>,
    blow_up: bool,
}

impl Run<'_> {
    fn horizon(&self) -> f64 {
        self.cfg.reversal.t.expect("validated at parse time")
    }

    /// Constants that do not depend on a stage.
    fn describe(&mut self) {
        let (m, g) = (self.m, self.cfg.grid);
        let man = &mut self.manifest;
        man.set("run", "status", "running");
        let stages: Vec<&str> = self.cfg.pipeline.stages.iter().map(|s| s.name()).collect();
        man.set("run", "stages", stages.join(", "));
        man.set("medium", "c0", m.c0);
        man.set("medium", "tau1", format!("{:e}", m.tau1));
        man.set("medium", "tau2", format!("{:e}", m.tau2));
        man.set("medium", "alpha2", format!("{:e}", m.alpha2));
        man.set("medium", "kc", m.kc().map_or("inf".into(), |k| format!("{k:e}")));
        man.set("medium", "wavefront_speed", wavefront_speed(&m));
        man.set("grid", "dim", g.dim);
        man.set("grid", "n", g.n);
        man.set("grid", "dx", format!("{:e}", g.dx));
        man.set("grid", "extent", format!("{:e}", g.extent()));
        man.set("grid", "dk", format!("{:e}", g.dk()));
        man.set("grid", "full_scale", self.cfg.full_scale);
        let o = self.cfg.omega;
        man.set("domain", "center", format!("{:e} {:e}", o.center[0], o.center[1]));
        man.set("domain", "radius", format!("{:e}", o.radius));
        if let Some(t) = self.cfg.reversal.t {
            man.set("reversal", "T", format!("{t:e}"));
        }
    }

    fn export(&mut self, field: &RealField, name: &str) -> Result<()> {
        for &f in &self.cfg.outputs.formats {
            self.outputs.extend(export_grid(field, f, &self.dir.join(name))?);
        }
        Ok(())
    }

    fn stage(&mut self, stage: Stage) -> Result<()> {
        match stage {
            Stage::Phantom => self.phantom(),
            Stage::Forward => self.forward(),
            Stage::Shift => self.shift(),
            Stage::Reverse => self.reverse(),
            Stage::Image => self.image(),
            Stage::Enhance => self.enhance(),
        }
    }

    fn phantom(&mut self) -> Result<()> {
        let phi = self.cfg.phantom.render(&self.cfg.grid, &self.cfg.omega)?;
        self.manifest.set("phantom", "max_abs", format!("{:e}", phi.max_abs()));
        self.export(&phi, "phi")?;
        self.phi = Some(phi);
        Ok(())
    }

    fn forward(&mut self) -> Result<()> {
        let t = self.horizon();
        let pl = &self.cfg.pipeline;
        let acq = Acquisition {
            omega: self.cfg.omega,
            n_detectors: pl.detectors,
            dt: pl.sample_dt.unwrap_or(t / 200.0),
        };
        let phi = self.phi.as_ref().expect("phantom runs first");
        let data = pat_forward(phi, &self.m, t, &acq)?;
        self.manifest.set("forward", "detectors", data.beta.n_detectors());
        self.manifest.set("forward", "sample_dt", format!("{:e}", data.beta.dt()));
        self.manifest.set("forward", "samples", data.beta.n_samples());
        self.export(&data.phi_t, "phi_T")?;
        self.outputs.push(export_series(&data.beta, &self.dir.join("beta.csv"))?);
        self.data = Some(data);
        Ok(())
    }

    fn shift(&mut self) -> Result<()> {
        let beta = &self.data.as_ref().expect("forward runs first").beta;
        let t1 = beta
            .positions()
            .iter()
            .map(|p| time_shift_t1(p, &self.m))
            .fold(0.0f64, f64::max);
        self.manifest.set("shift", "max_T1", format!("{t1:e}"));
        let causal = apply_time_shift(beta, &self.m, ShiftDirection::TvToCausal)?;
        self.outputs.push(export_series(&causal, &self.dir.join("beta_ksb.csv"))?);
        Ok(())
    }

    fn reversal_config(&mut self) -> Result<ReversalConfig> {
        let (m, t) = (self.m, self.horizon());
        let rv = self.cfg.reversal;
        let lossy = m.tau1 * m.c0 * m.c0;
        let eps = match (rv.eps, rv.d) {
            (Some(e), _) => e,
            (None, None) if m.tau1 > 0.0 => 0.05 * lossy,
            // The widest margin an explicit D admits.
            (None, Some(d)) => (d / t - lossy) / 2.0,
            (None, None) => {
                return Err(CliError::Config(
                    "[reversal] eps or D is required when tau1 = 0".into(),
                ))
            }
        };
        if !(eps > 0.0) {
            if let Some(d) = rv.d {
                return Err(PatError::BelowRequiredD { d, required: lossy * t }.into());
            }
        }
        let required = required_d(&m, t, eps)?;
        let d = rv.d.unwrap_or(required);
        let man = &mut self.manifest;
        man.set("reversal", "eps", format!("{eps:e}"));
        man.set("reversal", "D", format!("{d:e}"));
        man.set("reversal", "required_D", format!("{required:e}"));
        man.set("reversal", "resolution_threshold", format!("{:e}", lossy * t));
        Ok(ReversalConfig::new(&m, t, eps, d, m.tau2_mode())?)
    }

    fn reverse(&mut self) -> Result<()> {
        let rc = self.reversal_config()?;
        let phi_t = &self.data.as_ref().expect("forward runs first").phi_t;
        let f1 = time_reverse_f(phi_t, &self.m, &rc)?.scaled(2.0);
        self.export(&f1, "F1")?;
        self.f1 = Some(f1);
        Ok(())
    }

    fn image(&mut self) -> Result<()> {
        let (t, backend, factor) = (self.horizon(), self.cfg.pipeline.backend, self.cfg.pipeline.dt_factor);
        let man = &mut self.manifest;
        match backend {
            Backend::Fdtd => {
                let fc = FdtdConfig::for_horizon(&self.cfg.grid, &self.m, t, factor)?;
                man.set("image", "backend", "fdtd");
                man.set("image", "c1", fc.c1);
                man.set("image", "cfl_dt", format!("{:e}", cfl_dt(&self.cfg.grid, fc.c1)));
                man.set("image", "dt_factor", factor);
                man.set("image", "dt", format!("{:e}", fc.dt));
                man.set("image", "steps", fc.n_steps);
            }
            Backend::Spectral => man.set("image", "backend", "spectral"),
        }
        let phi = self.phi.as_ref().expect("phantom runs first");
        let out = image_i_dt(phi, &self.m, t, backend, factor)?;
        if let Some(rep) = &out.stability {
            self.manifest.set("image", "blow_up_threshold", format!("{:e}", rep.threshold));
            self.manifest.set("image", "blow_up", rep.blew_up());
            if let Some(step) = rep.blow_up_step {
                self.manifest.set("image", "blow_up_step", step);
            }
            let path = self.dir.join("stability.csv");
            let mut w = File::create(&path).map(BufWriter::new).map_err(|e| CliError::io(&path, e))?;
            rep.write_csv(&mut w)
                .and_then(|_| w.flush())
                .map_err(|e| CliError::io(&path, e))?;
            self.outputs.push(path);
        }
        match out.image {
            Some(img) => {
                self.export(&img.i, "I")?;
                self.export(&img.i0, "I0")?;
                self.export(&img.delta_i0, "delta_I0")?;
            }
            None => self.blow_up = true,
        }
        Ok(())
    }

    fn enhance(&mut self) -> Result<()> {
        let t = self.horizon();
        let ops = OperatorSymbols::new(&build_symbols(&self.cfg.grid, &self.m), t, self.m.tau2_mode())?;
        let lambda = self.cfg.reversal.lambda.unwrap_or_else(|| default_lambda(&ops));
        self.manifest.set("enhance", "lambda", format!("{lambda:e}"));
        let f1 = self.f1.as_ref().expect("reverse runs first");
        let out = solve_operator_eq(&f1.scaled(0.5), &ops, Some(lambda))?;
        self.export(&out, "enhanced")
    }
}
