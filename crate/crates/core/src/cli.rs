//! The `mixnorm` command line.

use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::gridio::{fmt17, read_grid, read_step_csv, write_curve_csv, write_step_csv};
use crate::harness::{run_chain_campaign_with, run_embedding_campaign, run_optimality_probe, Campaign, Probe};
use crate::kfun::{k_bruteforce, k_exact_l1_linf, k_holmstedt};
use crate::operators::{kerman_pick_transform, op_beta, op_h, op_hprime};
use crate::spaces::SpaceSpec;
use crate::stepfn::PWDecreasing;

#[derive(Parser, Debug)]
#[command(name = "mixnorm", version, about = "Rearrangement-invariant and mixed norms, Hardy operators and embedding campaigns")]
struct Cli {
    /// Seed for randomized families.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum HardyOp {
    #[value(name = "H")]
    H,
    #[value(name = "Hprime")]
    Hprime,
    #[value(name = "beta")]
    Beta,
    #[value(name = "kp")]
    Kp,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum KMethodArg {
    Auto,
    Bruteforce,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Norm of a rearrangement given as a step CSV.
    Norm {
        #[arg(long)]
        space: String,
        #[arg(long)]
        fstar: PathBuf,
    },
    /// Decreasing rearrangement of a grid file, as a step CSV.
    Rearrange {
        grid: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Hardy-type operator applied to f*, sampled at cell midpoints.
    Hardy {
        #[arg(long)]
        fstar: PathBuf,
        #[arg(long)]
        dim: usize,
        #[arg(long, value_enum)]
        op: HardyOp,
        /// Exponent of the `beta` operator.
        #[arg(long, default_value_t = 0.0)]
        beta: f64,
        #[arg(long, default_value_t = 64)]
        points: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// K-functional curve of a pair such as "L(1),Linf".
    Kfun {
        #[arg(long)]
        pair: String,
        #[arg(long)]
        fstar: PathBuf,
        /// Comma-separated t values; log-spaced in [1e-3, 1] when omitted.
        #[arg(long, value_delimiter = ',')]
        t: Vec<f64>,
        #[arg(long, default_value_t = 32)]
        points: usize,
        #[arg(long, value_enum, default_value = "auto")]
        method: KMethodArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Runs a campaign JSON file.
    Verify {
        campaign: PathBuf,
        /// Overrides the campaign's drift threshold.
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Both links of the Sobolev chain for L^p in dimension n.
    Chain {
        #[arg(long)]
        p: f64,
        #[arg(long)]
        dim: usize,
        #[arg(long, value_delimiter = ',', default_value = "64,128,256")]
        grid: Vec<usize>,
        #[arg(long, default_value_t = 0.15)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Optimality probe of W^1 Z against a smaller mixed range.
    Probe {
        /// Optimal space X (control arm).
        #[arg(long)]
        target: String,
        /// Smaller candidate X2.
        #[arg(long)]
        candidate: String,
        /// Z of the Sobolev domain.
        #[arg(long)]
        space: String,
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value_t = 0.15)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn open(path: &Path, field: &str) -> Result<File> {
    File::open(path).map_err(|e| Error::parse(field, format!("{}: {e}", path.display())))
}

fn read_fstar(path: &Path) -> Result<PWDecreasing> {
    read_step_csv(open(path, "fstar")?)
}

fn space(s: &str, field: &str) -> Result<SpaceSpec> {
    s.parse().map_err(|e| match e {
        Error::Parse { reason, .. } => Error::parse(field, reason),
        e => e,
    })
}

/// Splits "A,B" at the comma outside parentheses.
fn split_pair(s: &str) -> Result<(String, String)> {
    let mut depth = 0i32;
    for (i, c) in s.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => return Ok((s[..i].trim().into(), s[i + 1..].trim().into())),
            _ => {}
        }
    }
    Err(Error::parse("pair", format!("expected two spaces, got `{s}`")))
}

fn emit(out: &Option<PathBuf>, stdout: &mut dyn Write, body: &[u8]) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, body)?,
        None => stdout.write_all(body)?,
    }
    Ok(())
}

fn midpoints(k: usize) -> Vec<f64> {
    (0..k).map(|i| (i as f64 + 0.5) / k as f64).collect()
}

fn execute(cli: Cli, stdout: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Norm { space: s, fstar } => {
            let x = space(&s, "space")?;
            let f = read_fstar(&fstar)?;
            writeln!(stdout, "{}", fmt17(x.norm(&f)?))?;
        }
        Command::Rearrange { grid, out } => {
            let g = read_grid(BufReader::new(open(&grid, "grid")?))?;
            let mut buf = Vec::new();
            write_step_csv(&g.rearrangement(), &mut buf)?;
            emit(&out, stdout, &buf)?;
        }
        Command::Hardy {
            fstar,
            dim,
            op,
            beta,
            points,
            out,
        } => {
            let f = read_fstar(&fstar)?;
            let ts = midpoints(points.max(1));
            let (name, rows): (&str, Vec<(f64, f64)>) = match op {
                HardyOp::H => {
                    let h = op_h(&f, dim)?;
                    ("H", ts.iter().map(|&t| (t, h.eval(t))).collect())
                }
                HardyOp::Hprime => {
                    let h = op_hprime(&f, dim)?;
                    ("Hprime", ts.iter().map(|&t| (t, h.eval(t))).collect())
                }
                HardyOp::Beta => {
                    let h = op_beta(&f, beta)?;
                    ("beta", ts.iter().map(|&t| (t, h.eval(t))).collect())
                }
                HardyOp::Kp => {
                    let h = kerman_pick_transform(&f, dim)?;
                    ("kp", ts.iter().map(|&t| (t, h.eval(t))).collect())
                }
            };
            let mut buf = Vec::new();
            write_curve_csv(["t", name], &rows, &mut buf)?;
            emit(&out, stdout, &buf)?;
        }
        Command::Kfun {
            pair,
            fstar,
            t,
            points,
            method,
            out,
        } => {
            let (a, b) = split_pair(&pair)?;
            let x0 = space(&a, "pair")?;
            let x1 = space(&b, "pair")?;
            if x1 != SpaceSpec::Linf {
                return Err(Error::parse("pair", "the second space must be Linf"));
            }
            let f = read_fstar(&fstar)?;
            let ts = if t.is_empty() {
                let k = points.max(2);
                (0..k).map(|i| 10f64.powf(-3.0 + 3.0 * i as f64 / (k - 1) as f64)).collect()
            } else {
                t
            };
            let k = |t: f64| -> Result<f64> {
                match (method, x0) {
                    (KMethodArg::Bruteforce, _) => k_bruteforce(&f, &x0, t),
                    (KMethodArg::Auto, SpaceSpec::Lorentz { p, .. }) if p == 1.0 => k_exact_l1_linf(&f, t),
                    (KMethodArg::Auto, SpaceSpec::Lorentz { p, q }) => k_holmstedt(&f, p, q, t),
                    _ => Err(Error::Unsupported(format!("K-functional of ({x0}, Linf)"))),
                }
            };
            let rows = ts.iter().map(|&t| Ok((t, k(t)?))).collect::<Result<Vec<_>>>()?;
            let mut buf = Vec::new();
            write_curve_csv(["t", "K"], &rows, &mut buf)?;
            emit(&out, stdout, &buf)?;
        }
        Command::Verify { campaign, tol, out } => {
            let text = std::fs::read_to_string(&campaign)
                .map_err(|e| Error::parse("campaign", format!("{}: {e}", campaign.display())))?;
            let mut c = Campaign::from_json(&text)?;
            c.seed = cli.seed;
            if let Some(t) = tol {
                c.tol = t;
            }
            let r = run_embedding_campaign(&c)?;
            emit(&out, stdout, (r.to_json() + "\n").as_bytes())?;
        }
        Command::Chain { p, dim, grid, tol, out } => {
            let r = run_chain_campaign_with(
                p,
                dim,
                &grid,
                &crate::harness::default_slab_grids(dim),
                tol,
                crate::Exec::default(),
            )?;
            emit(&out, stdout, (r.to_json() + "\n").as_bytes())?;
        }
        Command::Probe {
            target,
            candidate,
            space: z,
            dim,
            tol,
            out,
        } => {
            let domain = space(&z, "space")?;
            let target = space(&target, "target")?;
            let candidate = space(&candidate, "candidate")?;
            let mut probe = Probe::new(domain, target, candidate, dim)?;
            probe.tol = tol;
            let r = run_optimality_probe(&probe)?;
            emit(&out, stdout, (r.to_json() + "\n").as_bytes())?;
        }
    }
    Ok(())
}

/// Runs the CLI on `args`; returns the exit code. Malformed input gives 2.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return e.exit_code();
        }
    };
    match execute(cli, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            match e {
                Error::Io(_) => 1,
                _ => 2,
            }
        }
    }
}

pub fn main() -> i32 {
    run(std::env::args_os(), &mut std::io::stdout(), &mut std::io::stderr())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_splitting() {
        assert_eq!(split_pair("L(2,1),Linf").unwrap(), ("L(2,1)".into(), "Linf".into()));
        assert!(split_pair("L(2,1)").is_err());
    }

    #[test]
    fn bad_space_exits_2() {
        let (mut o, mut e) = (Vec::new(), Vec::new());
        let code = run(["mixnorm", "norm", "--space", "Q(2)", "--fstar", "x.csv"], &mut o, &mut e);
        assert_eq!(code, 2);
        let msg = String::from_utf8(e).unwrap();
        assert!(msg.contains("`space`") && msg.contains("unknown space variant"), "{msg}");
    }
}
