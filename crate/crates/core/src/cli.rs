//! Command-line front end.
//!
//! The subcommands mirror how a document is built by hand:
//!
//! * `latexpass BASE`: one LaTeX run over `BASE.tex`. It rewrites `BASE.aux`
//!   and writes the rendered text to `BASE.rendered.txt`.
//! * `bibtex BASE`: reads `BASE.aux`, runs the named style over the named
//!   databases, and writes `BASE.bbl` and `BASE.blg`.
//! * `pipeline BASE`: one latexpass, one bibtex, then latexpasses until the
//!   labels settle.
//! * `lint BASE`: static checks on `BASE.bst`.
//!
//! Every command function writes its one-line summaries to `out` and its
//! diagnostics to `err`, and returns an [`ExitCode`].

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand as ClapSubcommand};

use crate::aux::{parse_aux, write_aux, AuxFile};
use crate::bib::{parse_bib, Database};
use crate::bst::parse_bst;
use crate::latex::{run_pass, scan_tex, PassResult, RERUN_WARNING};
use crate::lint::lint_style;
use crate::vm::run;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ExitCode {
    Success = 0,
    /// Lint findings, or warnings under `--strict`.
    Findings = 1,
    Error = 2,
}

impl ExitCode {
    pub fn code(self) -> i32 {
        self as i32
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subcommand {
    Bibtex,
    Latexpass,
    Pipeline,
    Lint,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliConfig {
    pub subcommand: Subcommand,
    /// File name without extension, relative to `work_dir`.
    pub base: String,
    pub work_dir: PathBuf,
    pub style_dir: Option<PathBuf>,
    pub bib_dir: Option<PathBuf>,
    pub max_passes: usize,
    pub strict: bool,
}

impl CliConfig {
    pub fn new(subcommand: Subcommand, base: &str) -> Self {
        CliConfig {
            subcommand,
            base: base.to_string(),
            work_dir: PathBuf::from("."),
            style_dir: None,
            bib_dir: None,
            max_passes: 5,
            strict: false,
        }
    }

    pub fn in_dir(mut self, dir: impl Into<PathBuf>) -> Self {
        self.work_dir = dir.into();
        self
    }

    fn file(&self, ext: &str) -> PathBuf {
        self.work_dir.join(format!("{}.{ext}", self.base))
    }
}

#[derive(Debug, Parser)]
#[command(name = "bstkit", version, about = "BibTeX-style bibliography toolchain")]
pub struct Args {
    #[command(subcommand)]
    command: Command,
    /// Extra directory searched for `.bst` files after the current one.
    #[arg(long, global = true, value_name = "PATH")]
    style_dir: Option<PathBuf>,
    /// Extra directory searched for `.bib` files after the current one.
    #[arg(long, global = true, value_name = "PATH")]
    bib_dir: Option<PathBuf>,
    /// Most LaTeX passes the pipeline runs after bibtex.
    #[arg(long, global = true, default_value_t = 5, value_parser = clap::value_parser!(u32).range(1..))]
    max_passes: u32,
    /// Treat warnings as failures (exit 1).
    #[arg(long, global = true)]
    strict: bool,
}

#[derive(Debug, ClapSubcommand)]
enum Command {
    /// Run a style over the databases named in BASE.aux.
    Bibtex { base: String },
    /// One LaTeX citation pass over BASE.tex.
    Latexpass { base: String },
    /// latexpass, bibtex, then latexpass until labels settle.
    Pipeline { base: String },
    /// Static checks on BASE.bst.
    Lint { base: String },
}

impl Args {
    pub fn into_config(self) -> Result<CliConfig, String> {
        let (subcommand, base) = match self.command {
            Command::Bibtex { base } => (Subcommand::Bibtex, base),
            Command::Latexpass { base } => (Subcommand::Latexpass, base),
            Command::Pipeline { base } => (Subcommand::Pipeline, base),
            Command::Lint { base } => (Subcommand::Lint, base),
        };
        // Accept `test.tex` as well as `test`.
        let base = base
            .strip_suffix(".tex")
            .or_else(|| base.strip_suffix(".aux"))
            .or_else(|| base.strip_suffix(".bst"))
            .unwrap_or(&base)
            .to_string();
        if base.is_empty() {
            return Err("base name must not be empty".to_string());
        }
        Ok(CliConfig {
            subcommand,
            base,
            work_dir: PathBuf::from("."),
            style_dir: self.style_dir,
            bib_dir: self.bib_dir,
            max_passes: self.max_passes as usize,
            strict: self.strict,
        })
    }
}

pub fn run_command(cfg: &CliConfig, out: &mut dyn Write, err: &mut dyn Write) -> ExitCode {
    match cfg.subcommand {
        Subcommand::Bibtex => cmd_bibtex(cfg, out, err),
        Subcommand::Latexpass => cmd_latexpass(cfg, out, err),
        Subcommand::Pipeline => cmd_pipeline(cfg, out, err),
        Subcommand::Lint => cmd_lint(cfg, out, err),
    }
}

/// Entry point for the binary: parses `std::env::args` and runs.
pub fn main_from_env() -> i32 {
    let args = Args::parse();
    let (stdout, stderr) = (io::stdout(), io::stderr());
    match args.into_config() {
        Ok(cfg) => run_command(&cfg, &mut stdout.lock(), &mut stderr.lock()).code(),
        Err(e) => {
            let _ = writeln!(stderr.lock(), "bstkit: {e}");
            ExitCode::Error.code()
        }
    }
}

// Diagnostics go to a terminal or a test buffer; a failed write there has
// nowhere better to be reported.
macro_rules! say {
    ($w:expr, $($arg:tt)*) => {
        let _ = writeln!($w, $($arg)*);
    };
}

fn write_atomic(path: &Path, contents: &str) -> io::Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path).inspect_err(|_| {
        let _ = fs::remove_file(&tmp);
    })
}

fn save(path: &Path, contents: &str, err: &mut dyn Write) -> Result<(), ExitCode> {
    write_atomic(path, contents).map_err(|e| {
        say!(err, "error: cannot write {}: {e}", path.display());
        ExitCode::Error
    })
}

/// Looks for `name` in the working directory, then in `extra`.
fn locate(cfg: &CliConfig, name: &str, extra: Option<&Path>) -> Result<PathBuf, Vec<PathBuf>> {
    let mut searched = vec![cfg.work_dir.join(name)];
    if let Some(dir) = extra {
        searched.push(dir.join(name));
    }
    searched.iter().find(|p| p.is_file()).cloned().ok_or(searched)
}

fn read_located(
    cfg: &CliConfig,
    what: &str,
    name: &str,
    extra: Option<&Path>,
    err: &mut dyn Write,
) -> Result<(PathBuf, String), ExitCode> {
    let path = locate(cfg, name, extra).map_err(|searched| {
        let list: Vec<String> = searched.iter().map(|p| p.display().to_string()).collect();
        say!(err, "error: {what} `{name}' not found (searched: {})", list.join(", "));
        ExitCode::Error
    })?;
    let text = fs::read_to_string(&path).map_err(|e| {
        say!(err, "error: cannot read {}: {e}", path.display());
        ExitCode::Error
    })?;
    Ok((path, text))
}

pub fn cmd_bibtex(cfg: &CliConfig, out: &mut dyn Write, err: &mut dyn Write) -> ExitCode {
    bibtex(cfg, out, err).unwrap_or_else(|code| code)
}

fn bibtex(cfg: &CliConfig, out: &mut dyn Write, err: &mut dyn Write) -> Result<ExitCode, ExitCode> {
    let aux_path = cfg.file("aux");
    let aux_text = fs::read_to_string(&aux_path).map_err(|e| {
        say!(err, "error: cannot read {}: {e}", aux_path.display());
        ExitCode::Error
    })?;
    let aux = parse_aux(&aux_text).map_err(|e| {
        say!(err, "error: {}: {e}", aux_path.display());
        ExitCode::Error
    })?;
    let Some(style) = &aux.style else {
        say!(err, "error: {} has no \\bibstyle command", aux_path.display());
        return Err(ExitCode::Error);
    };
    if aux.data.is_empty() {
        say!(err, "error: {} has no \\bibdata command", aux_path.display());
        return Err(ExitCode::Error);
    }

    let mut failed = false;
    let mut warnings = 0;
    let (bst_path, bst_text) = read_located(cfg, "style", &format!("{style}.bst"), cfg.style_dir.as_deref(), err)?;
    let (program, diags) = parse_bst(&bst_text, &bst_path.display().to_string());
    for d in &diags {
        say!(err, "{d}");
        failed |= d.is_error();
        warnings += usize::from(!d.is_error());
    }
    if failed {
        return Err(ExitCode::Error);
    }

    let mut dbs: Vec<Database> = Vec::new();
    for data in &aux.data {
        let (path, text) = read_located(cfg, "database", &format!("{data}.bib"), cfg.bib_dir.as_deref(), err)?;
        let (db, diags) = parse_bib(&text, &path.display().to_string());
        for d in &diags {
            say!(err, "{d}");
            failed |= d.is_error();
            warnings += usize::from(!d.is_error());
        }
        dbs.push(db);
    }

    let output = run(&program, &aux, &dbs);
    for r in &output.log.records {
        say!(err, "{r}");
    }
    save(&cfg.file("bbl"), &output.bbl_text(), err)?;
    save(&cfg.file("blg"), &output.log.render(), err)?;
    warnings += output.log.warning_count();
    failed |= output.has_errors();
    say!(
        out,
        "bibtex {}: {} entries, {} warnings, {} errors",
        cfg.base,
        output.entry_keys.len(),
        warnings,
        output.log.error_count()
    );
    Ok(if failed {
        ExitCode::Error
    } else if cfg.strict && warnings > 0 {
        ExitCode::Findings
    } else {
        ExitCode::Success
    })
}

pub fn cmd_latexpass(cfg: &CliConfig, out: &mut dyn Write, err: &mut dyn Write) -> ExitCode {
    match latex_pass(cfg, out, err) {
        Ok(_) => ExitCode::Success,
        Err(code) => code,
    }
}

fn latex_pass(cfg: &CliConfig, out: &mut dyn Write, err: &mut dyn Write) -> Result<PassResult, ExitCode> {
    let tex_path = cfg.file("tex");
    let text = fs::read_to_string(&tex_path).map_err(|e| {
        say!(err, "error: cannot read {}: {e}", tex_path.display());
        ExitCode::Error
    })?;
    let mut scan = scan_tex(&text)
        .map_err(|e| {
            say!(err, "error: {}: {e}", tex_path.display());
            ExitCode::Error
        })?
        .with_jobname(&cfg.base);
    if scan.is_external() {
        if let Ok(bbl) = fs::read_to_string(cfg.file("bbl")) {
            scan = scan.with_bbl(&bbl);
        }
    }
    let aux_path = cfg.file("aux");
    let old_aux: Option<AuxFile> = match fs::read_to_string(&aux_path) {
        Ok(t) => Some(parse_aux(&t).map_err(|e| {
            say!(err, "error: {}: {e}", aux_path.display());
            ExitCode::Error
        })?),
        Err(e) if e.kind() == io::ErrorKind::NotFound => None,
        Err(e) => {
            say!(err, "error: cannot read {}: {e}", aux_path.display());
            return Err(ExitCode::Error);
        }
    };

    let result = run_pass(&scan, old_aux.as_ref());
    save(&aux_path, &write_aux(&result.new_aux), err)?;
    save(&cfg.file("rendered.txt"), &result.rendered, err)?;
    for w in result.warnings.iter().filter(|w| *w != RERUN_WARNING) {
        say!(err, "LaTeX Warning: {w}");
    }
    if result.labels_changed {
        say!(err, "LaTeX Warning: {RERUN_WARNING}");
    }
    let undefined = result.warnings.iter().filter(|w| w.starts_with("Citation `")).count();
    say!(
        out,
        "latexpass {}: {} citations, {} undefined, labels {}",
        cfg.base,
        scan.cites.len(),
        undefined,
        if result.labels_changed { "changed" } else { "stable" }
    );
    Ok(result)
}

pub fn cmd_pipeline(cfg: &CliConfig, out: &mut dyn Write, err: &mut dyn Write) -> ExitCode {
    pipeline(cfg, out, err).unwrap_or_else(|code| code)
}

fn pipeline(cfg: &CliConfig, out: &mut dyn Write, err: &mut dyn Write) -> Result<ExitCode, ExitCode> {
    let tex_path = cfg.file("tex");
    let text = fs::read_to_string(&tex_path).map_err(|e| {
        say!(err, "error: cannot read {}: {e}", tex_path.display());
        ExitCode::Error
    })?;
    let scan = scan_tex(&text).map_err(|e| {
        say!(err, "error: {}: {e}", tex_path.display());
        ExitCode::Error
    })?;
    if scan.style.is_none() {
        say!(
            err,
            "error: {}: no style declared (missing \\bibliographystyle)",
            tex_path.display()
        );
        return Err(ExitCode::Error);
    }
    if scan.data.is_empty() {
        say!(
            err,
            "error: {}: no database declared (missing \\bibliography)",
            tex_path.display()
        );
        return Err(ExitCode::Error);
    }

    latex_pass(cfg, out, err)?;
    let code = bibtex(cfg, out, err)?;
    if code == ExitCode::Error {
        return Err(code);
    }
    for _ in 0..cfg.max_passes {
        if !latex_pass(cfg, out, err)?.labels_changed {
            return Ok(code);
        }
    }
    say!(
        err,
        "error: labels still changing after {} LaTeX passes",
        cfg.max_passes
    );
    Err(ExitCode::Error)
}

pub fn cmd_lint(cfg: &CliConfig, out: &mut dyn Write, err: &mut dyn Write) -> ExitCode {
    let name = format!("{}.bst", cfg.base);
    let (path, text) = match read_located(cfg, "style", &name, cfg.style_dir.as_deref(), err) {
        Ok(found) => found,
        Err(code) => return code,
    };
    let report = lint_style(&text, &path.display().to_string());
    for d in &report.diagnostics {
        say!(err, "{d}");
    }
    for f in &report.findings {
        say!(err, "{}:{f}", path.display());
    }
    say!(
        out,
        "lint {}: {} findings{}",
        cfg.base,
        report.findings.len(),
        if report.has_parse_errors() {
            ", parse errors"
        } else {
            ""
        }
    );
    match report.exit_code() {
        0 if cfg.strict && !report.diagnostics.is_empty() => ExitCode::Findings,
        0 => ExitCode::Success,
        1 => ExitCode::Findings,
        _ => ExitCode::Error,
    }
}
