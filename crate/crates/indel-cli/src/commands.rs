use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use indel::bounds::{achievable_upper, apes_lower_bound, apes_lower_bound_expanded, c_constant, rpes_lower_bound};
use indel::sim::{list_pairs, read_pair, write_pair};
use indel::theory::{
    align, construction_counts, enumerate_post_edit_set, estimate_natures_secret, typicalize, unresolved_fraction,
    AlignmentTree,
};
use indel::{
    decode, encode_with, gen_ltrrid, gen_pair, gen_pre_ess, make_construction, measure_rate, Alphabet, Construction,
    CorpusModel, DpMode, Model, RateBound, RateReport, RpesParams, Sequence, Transmission,
};
use serde::Serialize;

use crate::error::CliError;

pub const CSV_SCHEMA: u32 = 1;

pub fn read_sequence(path: &Path, alphabet: Alphabet) -> Result<Sequence, CliError> {
    Ok(Sequence::from_byte_image(alphabet, &fs::read(path)?)?)
}

pub fn encode_files(old: &Path, new: &Path, out: &Path, alphabet: Alphabet, oracle: bool) -> Result<RateReport, CliError> {
    let x = read_sequence(old, alphabet)?;
    let y = read_sequence(new, alphabet)?;
    let mode = if oracle { DpMode::Full } else { DpMode::Banded };
    let t = encode_with(&x, &y, mode)?;
    fs::write(out, t.to_bytes())?;
    Ok(measure_rate(&t))
}

pub fn decode_files(old: &Path, delta: &Path, out: &Path) -> Result<usize, CliError> {
    let t = Transmission::from_bytes(&fs::read(delta)?)?;
    let x = read_sequence(old, t.header.alphabet)?;
    let y = decode(&x, &t)?;
    let bytes = y.to_bytes();
    fs::write(out, &bytes)?;
    Ok(bytes.len())
}

pub struct GenArgs {
    pub model: CorpusModel,
    pub n: usize,
    pub alphabet: u32,
    pub eps: f64,
    pub del: f64,
    pub seed: u64,
    pub count: u64,
}

pub fn gen_corpus(args: &GenArgs, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    (args.seed..args.seed + args.count)
        .map(|seed| {
            let (x, y, meta) = gen_pair(args.model, args.n, args.alphabet, args.eps, args.del, seed)?;
            Ok(write_pair(out, &x, &y, &meta)?)
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundsReport {
    pub eps: f64,
    pub del: f64,
    pub alphabet: u32,
    pub tau: f64,
    pub c_constant: f64,
    pub rpes_lower: RateBound,
    pub rpes_upper: RateBound,
    /// Absent for binary alphabets, where the counting construction does not apply.
    pub apes_lower: Option<RateBound>,
    pub apes_lower_expanded: Option<RateBound>,
    pub apes_upper: RateBound,
}

pub fn bounds_report(eps: f64, del: f64, alphabet: u32, tau: f64) -> Result<BoundsReport, CliError> {
    Ok(BoundsReport {
        eps,
        del,
        alphabet,
        tau,
        c_constant: c_constant(alphabet, 1e-12)?.0,
        rpes_lower: rpes_lower_bound(eps, del, alphabet, tau)?,
        rpes_upper: achievable_upper(eps, del, alphabet, Model::Rpes, tau)?,
        apes_lower: (alphabet >= 3).then(|| apes_lower_bound(eps, del, alphabet)).transpose()?,
        apes_lower_expanded: (alphabet >= 3).then(|| apes_lower_bound_expanded(eps, del, alphabet)).transpose()?,
        apes_upper: achievable_upper(eps, del, alphabet, Model::Apes, tau)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub schema: u32,
    pub file: String,
    pub model: String,
    pub seed: u64,
    pub n: usize,
    pub a: u32,
    pub eps: f64,
    pub del: f64,
    pub k_ins: usize,
    pub k_del: usize,
    pub delta_bytes: usize,
    pub measured_rate: f64,
    pub lower_bound: Option<f64>,
    pub achievable_upper: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchSummary {
    pub pairs: usize,
    pub mean_rate: f64,
    pub max_excess: f64,
}

/// Encodes every pair of a corpus, checks each round trip, and writes one CSV
/// row per pair. With `slack` set, fails if any rate exceeds the achievable
/// bound by more than `slack`.
pub fn bench(corpus: &Path, csv_out: &Path, tau: f64, slack: Option<f64>) -> Result<(Vec<BenchRow>, BenchSummary), CliError> {
    let pairs = list_pairs(corpus)?;
    if pairs.is_empty() {
        return Err(CliError::Usage(format!("no pair files in {}", corpus.display())));
    }
    let mut w = csv::Writer::from_path(csv_out)?;
    let mut rows = Vec::with_capacity(pairs.len());
    for path in pairs {
        let (x, y, meta) = read_pair(&path)?;
        let t = encode_with(&x, &y, DpMode::Banded)?;
        if decode(&x, &t)? != y {
            return Err(indel::Error::DigestMismatch.into());
        }
        let report = measure_rate(&t);
        let (model, lower) = match meta.model {
            CorpusModel::Rpes => (Model::Rpes, Some(rpes_lower_bound(meta.eps, meta.del, meta.a, tau)?.value)),
            CorpusModel::Apes => {
                (Model::Apes, (meta.a >= 3).then(|| apes_lower_bound(meta.eps, meta.del, meta.a)).transpose()?.map(|b| b.value))
            }
        };
        let row = BenchRow {
            schema: CSV_SCHEMA,
            file: path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default(),
            model: serde_json::to_value(meta.model)?.as_str().unwrap_or_default().to_string(),
            seed: meta.seed,
            n: meta.n,
            a: meta.a,
            eps: meta.eps,
            del: meta.del,
            k_ins: meta.k_ins,
            k_del: meta.k_del,
            delta_bytes: t.encoded_len(),
            measured_rate: report.bits_per_source_symbol,
            lower_bound: lower,
            achievable_upper: achievable_upper(meta.eps, meta.del, meta.a, model, tau)?.value,
        };
        w.serialize(&row)?;
        rows.push(row);
    }
    w.flush()?;
    let mean_rate = rows.iter().map(|r| r.measured_rate).sum::<f64>() / rows.len() as f64;
    let max_excess = rows.iter().map(|r| r.measured_rate - r.achievable_upper).fold(f64::NEG_INFINITY, f64::max);
    let summary = BenchSummary { pairs: rows.len(), mean_rate, max_excess };
    if let Some(s) = slack {
        if max_excess > s {
            return Err(CliError::Check(format!("rate exceeds the achievable bound by {max_excess:.5} > {s}")));
        }
    }
    Ok((rows, summary))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Typicalize,
    Align,
    Enumerate,
    NaturesSecret,
}

#[derive(Debug, Clone)]
pub struct LabArgs {
    pub n: usize,
    pub alphabet: u32,
    pub eps: f64,
    pub del: f64,
    pub rates: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub x: Option<String>,
    pub y: Option<String>,
    pub construction: Option<Construction>,
    pub max_ins: usize,
    pub max_del: usize,
}

/// One experiment result; empty `bound` when the experiment has none.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LabRow {
    pub schema: u32,
    pub experiment: &'static str,
    pub n: usize,
    pub a: u32,
    pub eps: f64,
    pub del: f64,
    pub trials: usize,
    pub estimate: f64,
    pub stderr: Option<f64>,
    pub bound: Option<f64>,
}

pub enum LabOutput {
    Rows(Vec<LabRow>),
    Tree(AlignmentTree),
}

fn digits(al: Alphabet, s: &str) -> Result<Sequence, CliError> {
    Ok(Sequence::from_digits(al, s)?)
}

pub fn lab(exp: Experiment, args: &LabArgs) -> Result<LabOutput, CliError> {
    let al = Alphabet::new(args.alphabet)?;
    let row = |experiment, n, eps, del, trials, estimate, stderr, bound| LabRow {
        schema: CSV_SCHEMA,
        experiment,
        n,
        a: args.alphabet,
        eps,
        del,
        trials,
        estimate,
        stderr,
        bound,
    };
    match exp {
        Experiment::Typicalize => {
            // Fraction of edits that typicalization removes.
            let mut fractions = Vec::with_capacity(args.trials);
            for t in 0..args.trials as u64 {
                let s = args.seed.wrapping_add(t);
                let x = gen_pre_ess(args.n, al, s);
                let p = RpesParams { n: args.n, a: args.alphabet, eps: args.eps, del: args.del, seed: s };
                let (e, _) = gen_ltrrid(&x, &p)?;
                if e.edits() == 0 {
                    continue;
                }
                fractions.push(typicalize(&x, &e)?.eliminated() as f64 / e.edits() as f64);
            }
            let (mean, se) = mean_se(&fractions);
            Ok(LabOutput::Rows(vec![row("typicalize", args.n, args.eps, args.del, fractions.len(), mean, se, None)]))
        }
        Experiment::Align => match (&args.x, &args.y) {
            (Some(x), Some(y)) => Ok(LabOutput::Tree(align(&digits(al, x)?, &digits(al, y)?)?)),
            (None, None) => {
                let mut rows = Vec::new();
                for &p in &args.rates {
                    let r = unresolved_fraction(args.n, args.alphabet, p, args.trials, args.seed)?;
                    rows.push(row("align", args.n, p, p, r.trials, r.fraction, Some(r.stderr), None));
                }
                Ok(LabOutput::Rows(rows))
            }
            _ => Err(CliError::Usage("align needs both --x and --y, or neither".into())),
        },
        Experiment::Enumerate => {
            let (x, bound) = match (&args.x, args.construction) {
                (Some(x), None) => (digits(al, x)?, None),
                (None, Some(c)) => {
                    let x = make_construction(c, args.n, al)?;
                    let cc = construction_counts(args.n, args.alphabet, args.max_ins, args.max_del);
                    let b = match c {
                        Construction::AllSame(_) if args.max_del == 0 => Some(cc.single_run_insertions),
                        Construction::AllDistinct if args.max_ins == 0 => Some(cc.distinct_deletions),
                        Construction::Alternating => Some(cc.alternating_lower),
                        _ => None,
                    };
                    (x, b)
                }
                _ => return Err(CliError::Usage("enumerate needs exactly one of --x or --construction".into())),
            };
            let size = enumerate_post_edit_set(&x, args.max_ins, args.max_del)?.len();
            let (eps, del) = (args.max_ins as f64 / x.len().max(1) as f64, args.max_del as f64 / x.len().max(1) as f64);
            Ok(LabOutput::Rows(vec![row("enumerate", x.len(), eps, del, 1, size as f64, None, bound)]))
        }
        Experiment::NaturesSecret => {
            let r = estimate_natures_secret(args.n, args.alphabet, args.eps, args.del, args.trials, args.seed)?;
            let c = c_constant(args.alphabet, 1e-12)?.0;
            Ok(LabOutput::Rows(vec![row(
                "natures-secret",
                args.n,
                args.eps,
                args.del,
                r.trials,
                r.estimate,
                Some(r.stderr),
                Some(c * (args.eps + args.del)),
            )]))
        }
    }
}

fn mean_se(v: &[f64]) -> (f64, Option<f64>) {
    if v.is_empty() {
        return (0.0, None);
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, None);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, Some((var / n).sqrt()))
}

pub fn write_rows<T: Serialize>(rows: &[T], out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(p) => {
            let mut w = csv::Writer::from_path(p)?;
            for r in rows {
                w.serialize(r)?;
            }
            w.flush()?;
        }
        None => {
            let mut w = csv::Writer::from_writer(std::io::stdout().lock());
            for r in rows {
                w.serialize(r)?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

pub fn print_json<T: Serialize>(v: &T) -> Result<(), CliError> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, v)?;
    writeln!(out)?;
    Ok(())
}
