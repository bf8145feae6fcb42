//! The `cgrobust` command line.
//!
//! Exit codes: 0 success, 1 domain error (unreadable or invalid input,
//! bad manifest), 2 usage error, 3 for `diff --quiet` when differences
//! exist. Results go to standard output unless `--output` is given;
//! diagnostics go to standard error.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::criteria::{aggregate, eval_history, format_criteria, format_flat, parse_criteria, Criterion};
use crate::diff::{diff, format_diff, format_records};
use crate::io::{load_manifest, parse_kb};
use crate::model::KnowledgeBase;
use crate::render::{render_dot, render_svg};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DOMAIN: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DIFFERENT: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "cgrobust", version, about = "Robustness analysis for versioned conceptual-graph knowledge bases")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a knowledge-base file; prints one line per problem.
    Validate { path: PathBuf },
    /// List the changes between two versions.
    Diff {
        old: PathBuf,
        new: PathBuf,
        #[arg(long, value_enum, default_value_t = DiffFormat::Text)]
        format: DiffFormat,
        /// Print nothing; exit 3 when the versions differ.
        #[arg(long)]
        quiet: bool,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Evaluate add/del/mod criteria over a version history.
    Eval {
        /// File listing version paths, oldest first.
        #[arg(long, conflicts_with = "versions")]
        manifest: Option<PathBuf>,
        versions: Vec<PathBuf>,
        #[arg(long, value_enum, default_value_t = TableFormat::Xml)]
        out: TableFormat,
        /// Add rows for every context and for the whole graph.
        #[arg(long)]
        aggregate: bool,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Draw a version, optionally colored by one criterion.
    Render {
        kb: PathBuf,
        /// Criteria table produced by `eval`.
        #[arg(long)]
        criteria: Option<PathBuf>,
        #[arg(long, value_enum)]
        criterion: Option<CriterionArg>,
        #[arg(long, value_enum, default_value_t = RenderFormat::Svg)]
        out: RenderFormat,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum DiffFormat {
    Text,
    Records,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TableFormat {
    Xml,
    Flat,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum RenderFormat {
    Svg,
    Dot,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum CriterionArg {
    Add,
    Del,
    Mod,
}

impl From<CriterionArg> for Criterion {
    fn from(c: CriterionArg) -> Self {
        match c {
            CriterionArg::Add => Criterion::Add,
            CriterionArg::Del => Criterion::Del,
            CriterionArg::Mod => Criterion::Mod,
        }
    }
}

/// Runs one command and returns its exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(stderr, "{text}");
                EXIT_USAGE
            } else {
                let _ = write!(stdout, "{text}");
                EXIT_OK
            };
        }
    };
    let mut ctx = Ctx { stdout, stderr };
    let result = match cli.command {
        Command::Validate { path } => ctx.validate(&path),
        Command::Diff {
            old,
            new,
            format,
            quiet,
            output,
        } => ctx.diff(&old, &new, format, quiet, output.as_deref()),
        Command::Eval {
            manifest,
            versions,
            out,
            aggregate,
            output,
        } => ctx.eval(manifest.as_deref(), &versions, out, aggregate, output.as_deref()),
        Command::Render {
            kb,
            criteria,
            criterion,
            out,
            output,
        } => ctx.render(&kb, criteria.as_deref(), criterion.map(Into::into), out, output.as_deref()),
    };
    match result {
        Ok(code) => code,
        Err(Failure(code, msg)) => {
            let _ = writeln!(ctx.stderr, "cgrobust: {msg}");
            code
        }
    }
}

struct Failure(i32, String);

fn domain(msg: impl Into<String>) -> Failure {
    Failure(EXIT_DOMAIN, msg.into())
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure(EXIT_USAGE, msg.into())
}

struct Ctx<'a> {
    stdout: &'a mut dyn Write,
    stderr: &'a mut dyn Write,
}

impl Ctx<'_> {
    fn load(&mut self, path: &Path) -> Result<KnowledgeBase, Failure> {
        let bytes = fs::read(path).map_err(|e| domain(format!("cannot read {}: {e}", path.display())))?;
        parse_kb(&bytes).map_err(|errors| {
            for e in &errors {
                let _ = writeln!(self.stderr, "{}:{e}", path.display());
            }
            domain(format!("{} is not a valid knowledge base", path.display()))
        })
    }

    fn emit(&mut self, output: Option<&Path>, bytes: &[u8]) -> Result<i32, Failure> {
        match output {
            Some(path) => fs::write(path, bytes).map_err(|e| domain(format!("cannot write {}: {e}", path.display())))?,
            None => self
                .stdout
                .write_all(bytes)
                .map_err(|e| domain(format!("cannot write output: {e}")))?,
        }
        Ok(EXIT_OK)
    }

    fn validate(&mut self, path: &Path) -> Result<i32, Failure> {
        let bytes = fs::read(path).map_err(|e| domain(format!("cannot read {}: {e}", path.display())))?;
        match parse_kb(&bytes) {
            Ok(_) => Ok(EXIT_OK),
            Err(errors) => {
                for e in &errors {
                    let _ = writeln!(self.stderr, "{}:{e}", path.display());
                }
                Ok(EXIT_DOMAIN)
            }
        }
    }

    fn diff(&mut self, old: &Path, new: &Path, format: DiffFormat, quiet: bool, output: Option<&Path>) -> Result<i32, Failure> {
        let (old, new) = (self.load(old)?, self.load(new)?);
        let report = diff(&old, &new);
        if quiet {
            return Ok(if report.is_empty() { EXIT_OK } else { EXIT_DIFFERENT });
        }
        let text = match format {
            DiffFormat::Text => format_diff(&report),
            DiffFormat::Records => format_records(&report),
        };
        self.emit(output, text.as_bytes())
    }

    fn eval(
        &mut self,
        manifest: Option<&Path>,
        versions: &[PathBuf],
        out: TableFormat,
        with_aggregates: bool,
        output: Option<&Path>,
    ) -> Result<i32, Failure> {
        let paths: Vec<PathBuf> = match manifest {
            Some(m) => {
                let bytes = fs::read(m).map_err(|e| domain(format!("cannot read {}: {e}", m.display())))?;
                let listed = load_manifest(&bytes).map_err(|e| domain(format!("{}: {e}", m.display())))?;
                let base = m.parent().unwrap_or(Path::new(""));
                listed.into_iter().map(|p| base.join(p)).collect()
            }
            None => versions.to_vec(),
        };
        if paths.len() < 2 {
            return Err(usage(format!(
                "eval needs at least two versions (got {}); usage: cgrobust eval <OLD> <NEW>... | --manifest <FILE>",
                paths.len()
            )));
        }
        let kbs = paths.iter().map(|p| self.load(p)).collect::<Result<Vec<_>, _>>()?;
        let mut table = eval_history(&kbs).map_err(|e| domain(e.to_string()))?;
        if with_aggregates {
            table = aggregate(&table, kbs.last().expect("two or more")).map_err(|e| domain(e.to_string()))?;
        }
        let text = match out {
            TableFormat::Xml => format_criteria(&table),
            TableFormat::Flat => format_flat(&table),
        };
        self.emit(output, text.as_bytes())
    }

    fn render(
        &mut self,
        kb: &Path,
        criteria: Option<&Path>,
        criterion: Option<Criterion>,
        out: RenderFormat,
        output: Option<&Path>,
    ) -> Result<i32, Failure> {
        let table_text = match (criterion, criteria) {
            (Some(_), None) => return Err(usage("--criterion requires --criteria <FILE>")),
            (_, Some(path)) => Some(
                fs::read_to_string(path)
                    .map_err(|e| usage(format!("cannot read criteria file {}: {e}", path.display())))?,
            ),
            (None, None) => None,
        };
        let kb = self.load(kb)?;
        let table = table_text
            .map(|t| parse_criteria(&t))
            .transpose()
            .map_err(|e| domain(e.to_string()))?;
        let bytes = match out {
            RenderFormat::Svg => render_svg(&kb, table.as_ref(), criterion),
            RenderFormat::Dot => render_dot(&kb, table.as_ref(), criterion).map(String::into_bytes),
        }
        .map_err(|e| domain(e.to_string()))?;
        self.emit(output, &bytes)
    }
}
