//! `pat diag symbols`: the spectral symbols and operator zeros of a config.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use pat_core::inverse::{default_lambda, symbol_zero_report, OperatorSymbols};
use pat_core::medium::MediumParams;
use pat_core::spectral::{build_symbols, required_d, Branch};

use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SymbolSummary {
    pub kc: Option<f64>,
    pub k_max: f64,
    pub evanescent_nodes: usize,
    pub required_d: Option<f64>,
    pub lambda: f64,
    pub zero_shells: usize,
    pub files: Vec<PathBuf>,
}

impl SymbolSummary {
    pub fn render(&self) -> String {
        let opt = |v: Option<f64>| v.map_or("none".to_owned(), |x| format!("{x:e}"));
        format!(
            "kc = {}\nk_max = {:e}\nevanescent_nodes = {}\nrequired_D = {}\ndefault_lambda = {:e}\nzero_shells = {}\n",
            opt(self.kc),
            self.k_max,
            self.evanescent_nodes,
            opt(self.required_d),
            self.lambda,
            self.zero_shells,
        )
    }
}

/// Writes `symbols.csv` (one row per node on the positive first axis) and
/// `zero_report.csv` into the output directory.
pub fn symbols(cfg: &ExperimentConfig, m: &MediumParams) -> Result<SymbolSummary> {
    let t = cfg
        .reversal
        .t
        .ok_or_else(|| CliError::Config("[reversal] T is required by diag".into()))?;
    let g = cfg.grid;
    let s = build_symbols(&g, m);
    let ops = OperatorSymbols::new(&s, t, m.tau2_mode())?;
    let dir = &cfg.outputs.dir;
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;

    let sym_path = dir.join("symbols.csv");
    let mut w = File::create(&sym_path).map(BufWriter::new).map_err(|e| CliError::io(&sym_path, e))?;
    let io = |e| CliError::io(&sym_path, e);
    writeln!(w, "k, mu, branch, theta, j_hat, a_hat").map_err(io)?;
    for j in 0..g.n.div_ceil(2) {
        let mut idx = [0usize; 3];
        idx[g.dim - 1] = j;
        let i = g.flat_index(&idx);
        let (branch, theta) = match s.branch(i) {
            Branch::Oscillatory(th) => ("oscillatory", th),
            Branch::Evanescent(th) => ("evanescent", th),
        };
        writeln!(
            w,
            "{:e}, {:e}, {branch}, {theta:e}, {:e}, {:e}",
            s.k()[i],
            s.mu()[i],
            ops.j_hat()[i],
            ops.a_hat()[i]
        )
        .map_err(io)?;
    }
    w.flush().map_err(io)?;

    let report = symbol_zero_report(&ops);
    let zero_path = dir.join("zero_report.csv");
    let mut w = File::create(&zero_path).map(BufWriter::new).map_err(|e| CliError::io(&zero_path, e))?;
    report
        .write_csv(&mut w)
        .and_then(|_| w.flush())
        .map_err(|e| CliError::io(&zero_path, e))?;

    let eps = cfg.reversal.eps.unwrap_or(0.05 * m.tau1 * m.c0 * m.c0);
    Ok(SymbolSummary {
        kc: m.kc(),
        k_max: s.k().iter().copied().fold(0.0, f64::max),
        evanescent_nodes: s.theta().iter().filter(|th| th.im > 0.0).count(),
        required_d: required_d(m, t, eps).ok(),
        lambda: default_lambda(&ops),
        zero_shells: report.len(),
        files: vec![sym_path, zero_path],
    })
}
