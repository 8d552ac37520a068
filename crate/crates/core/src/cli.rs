//! Command-line front end. [`dispatch`] parses arguments, runs one
//! subcommand and returns the process exit code; data goes to the data
//! writer (or `--out`), diagnostics to the error writer.

use std::io::Write;
use std::path::PathBuf;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::arith::{Integer, OddPrime};
use crate::audit::{self, AuditReport, CheckBudget, RunMeta, WitnessStore};
use crate::barlow_abel::{decompose, gap_root, CandidateTriple};
use crate::dickson;
use crate::forms::{ad_forms, phi};
use crate::poly::{k_mod_p, k_poly, KMethod};
use crate::search::{congruence_stats, near_miss_scan_with, ScanOptions, SearchWindow, DEFAULT_MAX_TRIPLES};
use crate::{Error, Result, DEFAULT_SEED};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INTEGRITY: i32 = 3;
pub const EXIT_FALSIFIED: i32 = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "fermatlab", version, about = "Exact experiments around x^p + y^p = z^p")]
pub struct CliConfig {
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    /// Seed for sampled checks (decimal or 0x hex).
    #[arg(long, global = true, env = "FERMATLAB_SEED", value_parser = parse_seed_arg)]
    pub seed: Option<u64>,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Omit wall-clock and host metadata from output.
    #[arg(long, global = true)]
    pub deterministic: bool,
    /// Write data output to this file instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// phi_p(u, v) = sum u^(p-1-i) v^i.
    #[command(allow_negative_numbers = true)]
    Phi {
        p: u32,
        #[arg(value_parser = parse_int)]
        u: Integer,
        #[arg(value_parser = parse_int)]
        v: Integer,
    },
    /// A_p / D_p decompositions of phi_p.
    #[command(allow_negative_numbers = true)]
    Forms {
        p: u32,
        #[arg(value_parser = parse_int)]
        u: Integer,
        #[arg(value_parser = parse_int)]
        v: Integer,
        /// Alternating forms at (u, -v).
        #[arg(long)]
        alt: bool,
    },
    /// The gap quotient K_p.
    Kpoly {
        p: u32,
        #[arg(long, default_value = "division", value_parser = parse_method)]
        method: KMethod,
        /// Also print K_p(x=a) mod p and h_p.
        #[arg(long)]
        mod_p: bool,
    },
    /// Primitive Pythagorean triples from Dickson pairs.
    Dickson {
        #[arg(long)]
        z_max: u64,
    },
    /// Barlow-Abel classification of a triple.
    Decompose {
        p: u32,
        #[arg(value_parser = parse_int)]
        x: Integer,
        #[arg(value_parser = parse_int)]
        y: Integer,
        #[arg(value_parser = parse_int)]
        z: Integer,
    },
    /// Run the claim auditor.
    Audit {
        /// Comma-separated claim ids; all claims when omitted.
        #[arg(long, value_delimiter = ',')]
        claims: Vec<String>,
        /// A preset (default, quick, empty) or a key=value override; repeatable.
        #[arg(long)]
        budget: Vec<String>,
        /// Exit with code 4 when any claim is FALSIFIED.
        #[arg(long)]
        fail_on_falsified: bool,
        /// Persisted counterexamples, read before and updated after the run.
        #[arg(long)]
        witnesses: Option<PathBuf>,
        /// List the registry instead of running it.
        #[arg(long)]
        list: bool,
    },
    /// Exhaustive scan for solutions and near misses.
    Search {
        p: u32,
        #[arg(long)]
        bound: u64,
        #[arg(long, default_value_t = 10)]
        top_k: usize,
        /// Include triples with a common factor.
        #[arg(long)]
        all_triples: bool,
        /// Disable the residue prefilter.
        #[arg(long)]
        no_prefilter: bool,
        /// Refuse windows with more triples than this.
        #[arg(long, default_value_t = DEFAULT_MAX_TRIPLES)]
        max_triples: u128,
        /// Also tally congruence statistics.
        #[arg(long)]
        congruences: bool,
    },
}

fn parse_int(s: &str) -> std::result::Result<Integer, String> {
    s.parse().map_err(|_| format!("`{s}` is not an integer"))
}

fn parse_seed_arg(s: &str) -> std::result::Result<u64, String> {
    audit::parse_seed(s).map_err(|e| e.to_string())
}

fn parse_method(s: &str) -> std::result::Result<KMethod, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Integrity(_) | Error::NotDivisible { .. } => EXIT_INTEGRITY,
        Error::Domain(_)
        | Error::Precondition(_)
        | Error::UnknownClaim(_)
        | Error::Parse(_)
        | Error::BudgetExceeded { .. }
        | Error::Incomplete(_) => EXIT_USAGE,
        Error::Io(_) | Error::Json(_) | Error::Csv(_) => EXIT_FAILURE,
    }
}

/// Parse `args` (including the program name) and run.
pub fn dispatch<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cfg = match CliConfig::try_parse_from(args) {
        Ok(cfg) => cfg,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{e}");
                return EXIT_OK;
            }
            let rendered = e.to_string();
            let line = rendered.lines().next().unwrap_or("usage error");
            let _ = writeln!(stderr, "{line}");
            return EXIT_USAGE;
        }
    };
    match run(&cfg, stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "fermatlab: {e}");
            exit_code(&e)
        }
    }
}

fn run(cfg: &CliConfig, stdout: &mut dyn Write) -> Result<i32> {
    let workers = cfg
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
        .max(1);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Integrity(format!("thread pool: {e}")))?;
    let mut buf = Vec::new();
    let code = pool.install(|| execute(cfg, workers, &mut buf))?;
    match &cfg.out {
        Some(path) => std::fs::write(path, &buf)?,
        None => stdout.write_all(&buf)?,
    }
    Ok(code)
}

fn odd_prime(p: u32) -> Result<OddPrime> {
    OddPrime::new(p)
}

fn write_json<T: Serialize>(out: &mut Vec<u8>, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    out.push(b'\n');
    Ok(())
}

fn execute(cfg: &CliConfig, workers: usize, out: &mut Vec<u8>) -> Result<i32> {
    let seed = cfg.seed.unwrap_or(DEFAULT_SEED);
    match &cfg.command {
        Command::Phi { p, u, v } => {
            let value = phi(odd_prime(*p)?, u, v);
            match cfg.format {
                Format::Table => writeln!(out, "{value}")?,
                Format::Json => write_json(
                    out,
                    &json!({"p": p, "u": u.to_string(), "v": v.to_string(), "phi": value.to_string()}),
                )?,
                Format::Csv => writeln!(out, "p,u,v,phi\n{p},{u},{v},{value}")?,
            }
        }
        Command::Forms { p, u, v, alt } => {
            let pair = ad_forms(odd_prime(*p)?, u, v, *alt);
            match cfg.format {
                Format::Table => {
                    let uv = if *alt { "(u, -v)" } else { "(u, v)" };
                    writeln!(out, "phi{uv} = {}", pair.phi)?;
                    writeln!(out, "A = {}", pair.a)?;
                    writeln!(out, "D = {}", pair.d)?;
                    writeln!(out, "(uv)^k = {}", pair.uv_k)?;
                    writeln!(out, "holds = {}", pair.holds())?;
                }
                Format::Json => write_json(out, &json!({"forms": pair, "holds": pair.holds()}))?,
                Format::Csv => writeln!(
                    out,
                    "p,alternating,phi,a,d,uv_k,holds\n{},{},{},{},{},{},{}",
                    pair.p, pair.alternating, pair.phi, pair.a, pair.d, pair.uv_k, pair.holds()
                )?,
            }
        }
        Command::Kpoly { p, method, mod_p } => {
            let op = odd_prime(*p)?;
            let k = k_poly(op, *method)?;
            let reduced = if *mod_p { Some(k_mod_p(op)?) } else { None };
            match cfg.format {
                Format::Table => {
                    writeln!(out, "{k}")?;
                    if let Some(r) = &reduced {
                        writeln!(out, "K(x=a) mod {p} = {}", r.reduced)?;
                        writeln!(out, "h = {}", r.h)?;
                    }
                }
                Format::Json => {
                    let mut v = json!({"p": p, "method": method, "k": k});
                    if let Some(r) = &reduced {
                        v["mod_p"] = json!(r);
                    }
                    write_json(out, &v)?
                }
                Format::Csv => {
                    let mut w = csv::Writer::from_writer(&mut *out);
                    match &reduced {
                        Some(r) => {
                            w.write_record(["p", "k", "reduced", "h"])?;
                            w.write_record([p.to_string(), k.to_string(), r.reduced.to_string(), r.h.to_string()])?;
                        }
                        None => {
                            w.write_record(["p", "k"])?;
                            w.write_record([p.to_string(), k.to_string()])?;
                        }
                    }
                    w.flush()?;
                }
            }
        }
        Command::Dickson { z_max } => {
            let triples = dickson::enumerate_primitive(*z_max)?;
            match cfg.format {
                Format::Table => {
                    writeln!(out, "{:>8} {:>8} {:>8}", "x", "y", "z")?;
                    for t in &triples {
                        writeln!(out, "{:>8} {:>8} {:>8}", t.x, t.y, t.z)?;
                    }
                    writeln!(out, "{} primitive triples with z <= {z_max}", triples.len())?;
                }
                Format::Json => write_json(out, &triples)?,
                Format::Csv => dickson::write_csv(&triples, &mut *out)?,
            }
        }
        Command::Decompose { p, x, y, z } => {
            let op = odd_prime(*p)?;
            let t = CandidateTriple::new(x.clone(), y.clone(), z.clone())?;
            let d = decompose(op, &t);
            let g = gap_root(&d)?;
            match cfg.format {
                Format::Table => {
                    writeln!(out, "shape: {}", serde_json::to_value(d.shape)?.as_str().unwrap_or("?"))?;
                    writeln!(out, "a = {}, b = {}, c = {}", d.a, d.b, d.c)?;
                    writeln!(out, "phi(z,y) = {}, phi(z,x) = {}, phi(x,-y) = {}", d.phi_zy, d.phi_zx, d.phi_xy)?;
                    let f = d.pth_powers;
                    writeln!(
                        out,
                        "p-th powers: a={} b={} c={} phi_zy={} phi_zx={} phi_xy={}",
                        f.a, f.b, f.c, f.phi_zy, f.phi_zx, f.phi_xy
                    )?;
                    writeln!(out, "K = {}, p a b K = {}, exact root: {}", g.k, g.radicand, g.exact)?;
                    writeln!(out, "x^p + y^p - z^p = {}", g.residual)?;
                }
                Format::Json => write_json(out, &json!({"decomposition": d, "gap_root": g}))?,
                Format::Csv => {
                    let mut w = csv::Writer::from_writer(&mut *out);
                    w.write_record(["p", "x", "y", "z", "shape", "k", "radicand", "exact", "residual"])?;
                    w.write_record([
                        p.to_string(),
                        x.to_string(),
                        y.to_string(),
                        z.to_string(),
                        serde_json::to_value(d.shape)?.as_str().unwrap_or("?").to_string(),
                        g.k.to_string(),
                        g.radicand.to_string(),
                        g.exact.to_string(),
                        g.residual.to_string(),
                    ])?;
                    w.flush()?;
                }
            }
        }
        Command::Audit { claims, budget, fail_on_falsified, witnesses, list } => {
            if *list {
                return list_claims(cfg.format, out).map(|_| EXIT_OK);
            }
            let mut b = CheckBudget { seed, ..CheckBudget::default() };
            for item in budget {
                if item.contains('=') {
                    b.apply(item)?;
                } else {
                    b = CheckBudget { seed: b.seed, ..CheckBudget::preset(item)? };
                }
            }
            b.validate()?;
            let ids: Vec<&str> = if claims.is_empty() {
                audit::registry().iter().map(|c| c.id).collect()
            } else {
                claims.iter().map(String::as_str).collect()
            };
            let mut store = match witnesses {
                Some(path) => WitnessStore::load(path)?,
                None => WitnessStore::default(),
            };
            let started = Instant::now();
            let mut report = audit::run_claims(&ids, &b, &mut store)?;
            if !cfg.deterministic {
                report.meta = Some(RunMeta {
                    elapsed_ms: started.elapsed().as_millis(),
                    started_unix_ms: SystemTime::now()
                        .duration_since(UNIX_EPOCH)
                        .map_or(0, |d| d.as_millis()),
                });
            }
            if let Some(path) = witnesses {
                store.save(path)?;
            }
            write_report(cfg.format, &report, out)?;
            if *fail_on_falsified && report.any_falsified() {
                return Ok(EXIT_FALSIFIED);
            }
        }
        Command::Search { p, bound, top_k, all_triples, no_prefilter, max_triples, congruences } => {
            let w = SearchWindow::new(odd_prime(*p)?, *bound, !all_triples, *top_k)?;
            let opts = ScanOptions { workers, prefilter: !no_prefilter, max_triples: *max_triples };
            let report = near_miss_scan_with(&w, &opts)?;
            let tally = if *congruences { Some(congruence_stats(&w)?) } else { None };
            match cfg.format {
                Format::Table => {
                    writeln!(
                        out,
                        "p={} bound={} scanned={} candidates={} exact solutions={}",
                        report.p,
                        report.bound,
                        report.scanned,
                        report.candidates,
                        report.exact_solutions.len()
                    )?;
                    for t in &report.exact_solutions {
                        writeln!(out, "SOLUTION {} {} {}", t.x, t.y, t.z)?;
                    }
                    writeln!(out, "{:>10} {:>10} {:>10}  gap", "x", "y", "z")?;
                    for m in &report.near_misses {
                        writeln!(out, "{:>10} {:>10} {:>10}  {}", m.x, m.y, m.z, m.gap)?;
                    }
                    if let Some(t) = &tally {
                        writeln!(
                            out,
                            "(x+y-z)^p = x+y-z mod p: {}/{}; z-y = x mod p: {}/{}",
                            t.fermat_little, t.triples, t.z_minus_y_equiv_x, t.triples
                        )?;
                    }
                }
                Format::Json => match &tally {
                    Some(t) => write_json(out, &json!({"search": report, "congruences": t}))?,
                    None => write_json(out, &report)?,
                },
                Format::Csv => report.write_csv(&mut *out)?,
            }
        }
    }
    Ok(EXIT_OK)
}

fn list_claims(format: Format, out: &mut Vec<u8>) -> Result<()> {
    let reg = audit::registry();
    match format {
        Format::Json => write_json(out, &reg)?,
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut *out);
            w.write_record(["id", "eq_ref", "strategy", "statement"])?;
            for c in reg {
                let strategy = serde_json::to_value(c.strategy)?;
                w.write_record([c.id, c.eq_ref, strategy.as_str().unwrap_or("?"), c.statement])?;
            }
            w.flush()?;
        }
        Format::Table => {
            for c in reg {
                writeln!(out, "{:<8} {:<20} {}", c.id, c.eq_ref, c.statement)?;
            }
        }
    }
    Ok(())
}

fn write_report(format: Format, report: &AuditReport, out: &mut Vec<u8>) -> Result<()> {
    match format {
        Format::Json => write_json(out, report)?,
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut *out);
            w.write_record(["id", "eq_ref", "outcome", "checked_count", "witness", "notes"])?;
            for v in &report.claims {
                let witness = match &v.witness {
                    Some(wt) => serde_json::to_string(wt)?,
                    None => String::new(),
                };
                w.write_record([
                    v.id.clone(),
                    v.eq_ref.clone(),
                    v.outcome.to_string(),
                    v.checked_count.to_string(),
                    witness,
                    v.notes.clone(),
                ])?;
            }
            w.flush()?;
        }
        Format::Table => {
            for v in &report.claims {
                writeln!(out, "{:<8} {:<19} checked={:<8} {}", v.id, v.outcome, v.checked_count, v.notes)?;
                if let Some(w) = &v.witness {
                    if let Some(p) = w.p {
                        write!(out, "         witness p={p}")?;
                    } else {
                        write!(out, "         witness")?;
                    }
                    for (var, n) in &w.point {
                        write!(out, " {var}={n}")?;
                    }
                    if let Some(o) = &w.observed {
                        write!(out, " ({o})")?;
                    }
                    if let Some(d) = &w.difference {
                        write!(out, " difference: {d}")?;
                    }
                    writeln!(out)?;
                }
            }
            let c = &report.counts;
            writeln!(
                out,
                "verified={} falsified={} vacuous={} formula_mismatch={} incomplete={}",
                c.verified_in_domain, c.falsified, c.vacuous, c.formula_mismatch, c.incomplete
            )?;
            if let Some(m) = &report.meta {
                writeln!(out, "elapsed {} ms", m.elapsed_ms)?;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_by_error_class() {
        assert_eq!(exit_code(&Error::Integrity("x".into())), EXIT_INTEGRITY);
        assert_eq!(exit_code(&Error::NotDivisible { remainder: crate::Polynomial::one() }), EXIT_INTEGRITY);
        assert_eq!(exit_code(&Error::Domain("x".into())), EXIT_USAGE);
        assert_eq!(exit_code(&Error::UnknownClaim("C-99".into())), EXIT_USAGE);
    }

    #[test]
    fn dispatch_captures_output() {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        assert_eq!(dispatch(["fermatlab", "phi", "3", "2", "1"], &mut out, &mut err), EXIT_OK);
        assert_eq!(String::from_utf8(out).unwrap().trim(), "7");
        assert!(err.is_empty());
    }
}
