//! Acceptance suite. Prints one PASS/FAIL line per criterion.
//!
//! Exits 0 regardless of outcome so the workspace test run stays usable;
//! set ACCEPTANCE_STRICT=1 to exit 1 when any criterion fails. ACCEPTANCE_ONLY
//! takes a comma-separated list of ids (AC1,AC3) to run a subset.

use std::collections::{BTreeSet, HashMap};
use std::time::{Duration, Instant};

use indel::bounds::DEFAULT_TAU;
use indel::theory::{
    align, alignment_of, enumerate_post_edit_set, post_edit_set_size, extended_run_edit_counts, is_typical, recombine, typicalize,
    typicalized_posess, unresolved_fraction, GlobalAlignment,
};
use indel::{
    achievable_upper, apply_edit_pattern, c_constant, decode, edit_distance_banded, edit_distance_full, encode,
    encode_contents, encode_ops, gen_ltrrid, gen_pair, gen_pre_ess, make_construction, measure_rate,
    rpes_lower_bound, Alphabet, Construction, CorpusModel, EditOp, EditPattern, Model, OpKind, RpesParams, Sequence,
    Symbol,
};
use indel_cli::sync::{push, Server, Store};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn run(id: &str, title: &str, budget: Duration, f: impl FnOnce() -> Outcome) -> Option<bool> {
    if let Ok(only) = std::env::var("ACCEPTANCE_ONLY") {
        if !only.split(',').any(|s| s.trim() == id) {
            return None;
        }
    }
    let start = Instant::now();
    let o = f();
    let took = start.elapsed();
    let in_time = took <= budget;
    let pass = o.pass && in_time;
    let timing = if in_time {
        format!("{:.1}s", took.as_secs_f64())
    } else {
        format!("{:.1}s over the {}s budget", took.as_secs_f64(), budget.as_secs())
    };
    println!("{id} {} {title}: {} ({timing})", if pass { "PASS" } else { "FAIL" }, o.detail);
    Some(pass)
}

fn all_sources(n: usize, a: u32) -> impl Iterator<Item = Vec<Symbol>> {
    (0..(a as u64).pow(n as u32)).map(move |mut v| {
        (0..n)
            .map(|_| {
                let s = (v % a as u64) as Symbol;
                v /= a as u64;
                s
            })
            .collect()
    })
}

/// Every op sequence over `n` source symbols with at most `budget` edits and
/// at most `per_gap` insertions in a row.
fn patterns(n: usize, a: Symbol, budget: usize, per_gap: usize) -> Vec<EditPattern> {
    struct Walk {
        n: usize,
        a: Symbol,
        per_gap: usize,
        cur: Vec<EditOp>,
        out: Vec<EditPattern>,
    }
    fn go(w: &mut Walk, i: usize, left: usize, run: usize) {
        if i == w.n {
            w.out.push(EditPattern::new(w.cur.clone()));
        }
        if left > 0 && run < w.per_gap {
            for c in 0..w.a {
                w.cur.push(EditOp::Insert(c));
                go(w, i, left - 1, run + 1);
                w.cur.pop();
            }
        }
        if i < w.n {
            w.cur.push(EditOp::NoOp);
            go(w, i + 1, left, 0);
            w.cur.pop();
            if left > 0 {
                w.cur.push(EditOp::Delete);
                go(w, i + 1, left - 1, 0);
                w.cur.pop();
            }
        }
    }
    let mut w = Walk { n, a, per_gap, cur: Vec::new(), out: Vec::new() };
    go(&mut w, 0, budget, 0);
    w.out
}

fn random_pattern(rng: &mut ChaCha8Rng, n: usize, a: u32, eps: f64, del: f64) -> EditPattern {
    let mut ops = Vec::with_capacity(n + n / 4);
    let mut i = 0;
    loop {
        let u: f64 = rng.gen();
        if u < eps {
            ops.push(EditOp::Insert(rng.gen_range(0..a) as Symbol));
        } else if i == n {
            break;
        } else if u < eps + del {
            ops.push(EditOp::Delete);
            i += 1;
        } else {
            ops.push(EditOp::NoOp);
            i += 1;
        }
    }
    EditPattern::new(ops)
}

fn entropy_bits<T: std::hash::Hash + Eq>(items: impl IntoIterator<Item = T>) -> f64 {
    let mut counts: HashMap<T, usize> = HashMap::new();
    let mut total = 0usize;
    for s in items {
        *counts.entry(s).or_default() += 1;
        total += 1;
    }
    counts.values().map(|&c| c as f64 * (total as f64 / c as f64).log2()).sum()
}

fn binom(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn ac1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xac1);
    let mut ok = 0;
    let mut total = 0;
    let mut first_bad = None;
    for model in [CorpusModel::Rpes, CorpusModel::Apes] {
        for k in 0..1000u64 {
            let n = [1_000, 10_000][(k % 2) as usize];
            let a = [2, 4, 256][((k / 2) % 3) as usize];
            let eps = rng.gen_range(0.0..=0.05);
            let del = rng.gen_range(0.0..=0.05);
            let (x, y, _) = gen_pair(model, n, a, eps, del, k).expect("generate pair");
            total += 1;
            let good = encode(&x, &y)
                .and_then(|t| indel::Transmission::from_bytes(&t.to_bytes()))
                .and_then(|t| decode(&x, &t))
                .map(|z| z == y)
                .unwrap_or(false);
            if good {
                ok += 1;
            } else if first_bad.is_none() {
                first_bad = Some(format!("{model:?} seed {k}"));
            }
        }
    }
    let detail = match first_bad {
        None => format!("{ok}/{total} pairs decode exactly"),
        Some(b) => format!("{ok}/{total} pairs decode exactly, first failure {b}"),
    };
    outcome(ok == total, detail)
}

fn ac2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xac2);
    let mut random_ok = 0;
    for _ in 0..500 {
        let a = [2u32, 4, 256][rng.gen_range(0..3)];
        let al = Alphabet::new(a).unwrap();
        let n = rng.gen_range(0..=200);
        let x = gen_pre_ess(n, al, rng.gen());
        let (eps, del) = (rng.gen_range(0.0..0.3), rng.gen_range(0.0..0.3));
        let e = random_pattern(&mut rng, n, a, eps, del);
        let y = apply_edit_pattern(&x, &e).unwrap();
        if edit_distance_banded(&x, &y).unwrap().distance == edit_distance_full(&x, &y).unwrap().distance {
            random_ok += 1;
        }
    }

    let mut cases = 0usize;
    let mut dist_bad = 0usize;
    let mut fact_bad = 0usize;
    for a in [2u32, 3] {
        let al = Alphabet::new(a).unwrap();
        for n in 0..=6 {
            let pats = patterns(n, a as Symbol, 3, 3);
            for xs in all_sources(n, a) {
                let x = Sequence::new(al, xs).unwrap();
                // Per output, the fewest insertions and deletions of any pattern reaching it.
                let mut fewest: HashMap<Vec<Symbol>, (usize, usize)> = HashMap::new();
                for e in &pats {
                    cases += 1;
                    let y = apply_edit_pattern(&x, e).unwrap().into_symbols();
                    let f = fewest.entry(y).or_insert((usize::MAX, usize::MAX));
                    f.0 = f.0.min(e.k_ins());
                    f.1 = f.1.min(e.k_del());
                }
                for (ys, (ins, del)) in fewest {
                    let y = Sequence::new(al, ys).unwrap();
                    let b = edit_distance_banded(&x, &y).unwrap();
                    let f = edit_distance_full(&x, &y).unwrap();
                    dist_bad += usize::from(b.distance != f.distance);
                    fact_bad += usize::from(b.script.k_ins() > ins || b.script.k_del() > del);
                }
            }
        }
    }
    outcome(
        random_ok == 500 && dist_bad == 0 && fact_bad == 0,
        format!(
            "random {random_ok}/500 agree; exhaustive {cases} patterns with {dist_bad} distance mismatches and {fact_bad} rate violations"
        ),
    )
}

fn ac3() -> Outcome {
    let (n, a, p) = (1_000_000, 256, 0.01);
    let rates: Vec<f64> = (0..20u64)
        .map(|seed| {
            let (x, y, _) = gen_pair(CorpusModel::Rpes, n, a, p, p, seed).expect("generate pair");
            let t = encode(&x, &y).expect("encode");
            measure_rate(&t).bits_per_source_symbol
        })
        .collect();
    let mean = rates.iter().sum::<f64>() / rates.len() as f64;
    let lo = rpes_lower_bound(p, p, a, DEFAULT_TAU).unwrap().value;
    let hi = achievable_upper(p, p, a, Model::Rpes, DEFAULT_TAU).unwrap().value + 0.02;
    let pass = (lo..=hi).contains(&mean) && (0.23..=0.262).contains(&mean);
    outcome(pass, format!("mean rate {mean:.5} over 20 seeds, window [{lo:.5}, {hi:.5}]"))
}

fn ac4() -> Outcome {
    let (n, eps, del, seeds) = (100_000usize, 0.02, 0.01, 200u64);
    let al = Alphabet::new(256).unwrap();
    let (mut kd, mut ki) = (0.0, 0.0);
    for seed in 0..seeds {
        let x = gen_pre_ess(n, al, seed);
        let (e, _) = gen_ltrrid(&x, &RpesParams { n, a: 256, eps, del, seed }).unwrap();
        kd += e.k_del() as f64;
        ki += e.k_ins() as f64;
    }
    kd /= seeds as f64;
    ki /= seeds as f64;
    // Deletions are binomial over n symbols with q = del / (1 - eps); insertions
    // are negative binomial over n + 1 gaps.
    let q = del / (1.0 - eps);
    let (mu_d, var_d) = (n as f64 * q, n as f64 * q * (1.0 - q));
    let (mu_i, var_i) = ((n + 1) as f64 * eps / (1.0 - eps), (n + 1) as f64 * eps / (1.0 - eps).powi(2));
    let zd = (kd - mu_d) / (var_d / seeds as f64).sqrt();
    let zi = (ki - mu_i) / (var_i / seeds as f64).sqrt();
    outcome(
        zd.abs() <= 3.0 && zi.abs() <= 3.0,
        format!("mean K_D {kd:.1} vs {mu_d:.1} (z={zd:+.2}), mean K_I {ki:.1} vs {mu_i:.1} (z={zi:+.2})"),
    )
}

fn typicalization_holds(x: &Sequence, e: &EditPattern) -> bool {
    let tp = typicalize(x, e).unwrap();
    extended_run_edit_counts(x, &tp.e_hat).unwrap().extended.iter().all(|&c| c <= 1)
        && recombine(&tp).unwrap() == *e
}

fn ac5() -> Outcome {
    use EditOp::{Delete, Insert, NoOp};
    let mut exhaustive = 0usize;
    let mut bad = 0usize;
    for a in [2u32, 3] {
        let al = Alphabet::new(a).unwrap();
        for n in 0..=6 {
            let pats = patterns(n, a as Symbol, 3, 2);
            for xs in all_sources(n, a) {
                let x = Sequence::new(al, xs).unwrap();
                for e in &pats {
                    exhaustive += 1;
                    bad += usize::from(!typicalization_holds(&x, e));
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0xac5);
    for _ in 0..100_000 {
        let a = rng.gen_range(2..=4u32);
        let x = gen_pre_ess(50, Alphabet::new(a).unwrap(), rng.gen());
        let (eps, del) = (rng.gen_range(0.0..0.3), rng.gen_range(0.0..0.3));
        let e = random_pattern(&mut rng, 50, a, eps, del);
        bad += usize::from(!typicalization_holds(&x, &e));
    }

    let seq = |a: u32, s: &str| Sequence::from_digits(Alphabet::new(a).unwrap(), s).unwrap();
    let x = seq(4, "0111223");
    let e1 = EditPattern::new(vec![NoOp, Delete, NoOp, NoOp, Delete, NoOp, NoOp]);
    let t1 = typicalize(&x, &e1).unwrap();
    let ex1 = t1.e_hat.ops() == [NoOp, NoOp, NoOp, NoOp, Delete, NoOp, NoOp]
        && typicalized_posess(&x, &t1).unwrap().to_string() == "011123";
    let x = seq(5, "0111223");
    let e2 = EditPattern::new(vec![NoOp, NoOp, NoOp, NoOp, Insert(4), NoOp, NoOp, Delete]);
    let t2 = typicalize(&x, &e2).unwrap();
    let ex2 = t2.e_hat.ops() == [NoOp, NoOp, NoOp, NoOp, NoOp, NoOp, Delete]
        && typicalized_posess(&x, &t2).unwrap().to_string() == "011122";
    outcome(
        bad == 0 && ex1 && ex2,
        format!(
            "{exhaustive} exhaustive and 100000 random cases, {bad} violations; {}/2 worked examples reproduce",
            u8::from(ex1) + u8::from(ex2)
        ),
    )
}

fn ac6() -> Outcome {
    let mut checked = 0usize;
    let mut cross = 0usize;
    let mut bad = Vec::new();
    // Exact size; small instances are also materialized and must agree.
    let mut size = |x: &Sequence, ins: usize, del: usize, bad: &mut Vec<String>| -> f64 {
        checked += 1;
        let count = post_edit_set_size(x, ins, del).unwrap();
        if x.len() + ins <= 9 {
            cross += 1;
            let listed = enumerate_post_edit_set(x, ins, del).unwrap().len() as u64;
            if listed != count {
                bad.push(format!("x={x} ins={ins} del={del}: counted {count}, listed {listed}"));
            }
        }
        count as f64
    };
    for a in 2..=4u32 {
        let al = Alphabet::new(a).unwrap();
        for n in 1..=12usize {
            let same = make_construction(Construction::AllSame(0), n, al).unwrap();
            let distinct = make_construction(Construction::AllDistinct, n, al).unwrap();
            let alt = make_construction(Construction::Alternating, n, al).unwrap();
            for ins in 0..=(12 - n) {
                let got = size(&same, ins, 0, &mut bad);
                let want: f64 = (0..=ins).map(|j| binom(n + ins, j) * ((a - 1) as f64).powi(j as i32)).sum();
                if got != want {
                    bad.push(format!("run a={a} n={n} ins={ins}: {got} != {want}"));
                }
                for d in 0..=n {
                    let kept = n - d;
                    if ins == 0 {
                        let got = size(&distinct, 0, d, &mut bad);
                        if got < binom(kept, d) {
                            bad.push(format!("distinct a={a} n={n} del={d}: {got}"));
                        }
                    }
                    let got = size(&alt, ins, d, &mut bad);
                    let lb = binom(kept, d) * binom(kept + ins, ins) * ((a - 2) as f64).powi(ins as i32);
                    if got < lb {
                        bad.push(format!("alternating a={a} n={n} ins={ins} del={d}: {got} < {lb}"));
                    }
                }
            }
        }
    }
    let anchor = enumerate_post_edit_set(
        &make_construction(Construction::Alternating, 6, Alphabet::new(3).unwrap()).unwrap(),
        1,
        1,
    )
    .unwrap()
    .len();
    let pass = bad.is_empty() && anchor >= 30;
    let mut detail = format!(
        "{checked} instances counted, {cross} also enumerated; alternating n=6 a=3 with one of each gives {anchor} >= 30"
    );
    if let Some(b) = bad.first() {
        detail.push_str(&format!("; {} failures, first {b}", bad.len()));
    }
    outcome(pass, detail)
}

fn ac7() -> Outcome {
    let c2 = c_constant(2, 1e-12).unwrap().0;
    let mut grid_bad = 0usize;
    let mut grid = 0usize;
    for a in [4u32, 16, 256] {
        for i in 0..=10 {
            for j in 0..=10 {
                let (eps, del) = (i as f64 * 0.005, j as f64 * 0.005);
                grid += 1;
                let r_lo = rpes_lower_bound(eps, del, a, DEFAULT_TAU).unwrap().value;
                let r_hi = achievable_upper(eps, del, a, Model::Rpes, DEFAULT_TAU).unwrap().value;
                let a_lo = indel::apes_lower_bound(eps, del, a).unwrap().value;
                let a_hi = achievable_upper(eps, del, a, Model::Apes, DEFAULT_TAU).unwrap().value;
                grid_bad += usize::from(r_lo > r_hi || a_lo > a_hi);
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(0xac7);
    let mut worst_excess = f64::NEG_INFINITY;
    let mut coder_bad = 0usize;
    for (p_ins, p_del) in [(0.01, 0.01), (0.05, 0.02), (0.2, 0.1), (0.33, 0.33), (0.0, 0.0), (0.001, 0.0)] {
        let ops: Vec<OpKind> = (0..10_000)
            .map(|_| {
                let u: f64 = rng.gen();
                if u < p_ins {
                    OpKind::Insert
                } else if u < p_ins + p_del {
                    OpKind::Delete
                } else {
                    OpKind::NoOp
                }
            })
            .collect();
        let h = entropy_bits(ops.iter().map(|&k| k as u8));
        let bits = encode_ops(&ops).bit_length as f64;
        let limit = h * 1.02 + 64.0;
        worst_excess = worst_excess.max(bits - limit);
        coder_bad += usize::from(bits > limit);
    }
    for a in [2u32, 16, 256] {
        let al = Alphabet::new(a).unwrap();
        let syms: Vec<Symbol> = (0..10_000).map(|_| rng.gen_range(0..a) as Symbol).collect();
        let h = entropy_bits(syms.iter().copied());
        let bits = encode_contents(&syms, al).unwrap().bit_length as f64;
        let limit = h * 1.02 + 64.0;
        worst_excess = worst_excess.max(bits - limit);
        coder_bad += usize::from(bits > limit);
    }
    outcome(
        (1.28..=1.30).contains(&c2) && grid_bad == 0 && coder_bad == 0,
        format!(
            "C_2 = {c2:.6}; {grid_bad}/{grid} grid points out of order; coder worst margin {worst_excess:+.1} bits against entropy + 2% + 64"
        ),
    )
}

fn ac8() -> Outcome {
    let mut instances = 0usize;
    let mut missing = 0usize;
    let mut check = |x: &Sequence| {
        let mut by_y: HashMap<Vec<Symbol>, BTreeSet<GlobalAlignment>> = HashMap::new();
        for e in patterns(x.len(), x.alphabet().size() as Symbol, 3, 1) {
            if !is_typical(x, &e).unwrap() {
                continue;
            }
            let y = apply_edit_pattern(x, &e).unwrap().into_symbols();
            by_y.entry(y).or_default().insert(alignment_of(x, &e).unwrap());
        }
        for (ys, truth) in by_y {
            instances += truth.len();
            let y = Sequence::new(x.alphabet(), ys).unwrap();
            let leaves: BTreeSet<GlobalAlignment> = align(x, &y).unwrap().leaves().into_iter().collect();
            missing += truth.difference(&leaves).count();
        }
    };
    let b2 = Alphabet::new(2).unwrap();
    for n in 1..=10 {
        for xs in all_sources(n, 2) {
            check(&Sequence::new(b2, xs).unwrap());
        }
    }
    let b3 = Alphabet::new(3).unwrap();
    for n in 1..=7 {
        for xs in all_sources(n, 3) {
            check(&Sequence::new(b3, xs).unwrap());
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0xac8);
    for n in 8..=10 {
        for _ in 0..150 {
            check(&gen_pre_ess(n, b3, rng.gen()));
        }
    }

    let rates = [0.2, 0.1, 0.05, 0.02];
    let fr: Vec<f64> = rates.iter().map(|&p| unresolved_fraction(40, 2, p, 1500, 7).unwrap().fraction).collect();
    let monotone = fr.windows(2).all(|w| w[1] <= w[0]);
    let shown: Vec<String> = rates.iter().zip(&fr).map(|(p, f)| format!("{p}:{f:.3}")).collect();
    outcome(
        missing == 0 && monotone,
        format!(
            "{instances} true alignments (a=2 n<=10 and a=3 n<=7 exhaustive, a=3 n=8..10 sampled; 3 edits), {missing} not leaves; unresolved fraction {} {}",
            shown.join(" "),
            if monotone { "nonincreasing" } else { "not nonincreasing" }
        ),
    )
}

fn ac9() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let store = Store::open(dir.path()).unwrap();
    let server = Server::bind("127.0.0.1:0", store).unwrap();
    let addr = server.local_addr().unwrap();
    let handle = std::thread::spawn(move || server.run(Some(101)).unwrap());
    let al = Alphabet::new(256).unwrap();

    let mut rng = ChaCha8Rng::seed_from_u64(0xac9);
    let mut client: Vec<u8> = Vec::new();
    let mut failures = 0usize;
    for v in 0..100u64 {
        let x = Sequence::from_byte_image(al, &client).unwrap();
        let next = if client.is_empty() {
            gen_pre_ess(4000, al, v).to_bytes()
        } else {
            let e = random_pattern(&mut rng, x.len(), 256, 0.02, 0.02);
            apply_edit_pattern(&x, &e).unwrap().to_bytes()
        };
        if push(addr, "doc", &client, &next, al, indel::DpMode::Banded).is_err() {
            failures += 1;
        }
        client = next;
    }
    let synced = std::fs::read(dir.path().join("doc")).unwrap_or_default() == client;

    let mut stale = client.clone();
    stale[0] ^= 1;
    let refused = push(addr, "doc", &stale, b"should not land", al, indel::DpMode::Banded).is_err();
    handle.join().unwrap();
    let unchanged = std::fs::read(dir.path().join("doc")).unwrap_or_default() == client;
    outcome(
        failures == 0 && synced && refused && unchanged,
        format!(
            "100 chained pushes with {failures} errors, server copy {}; stale push {} and store {}",
            if synced { "matches" } else { "differs" },
            if refused { "refused" } else { "accepted" },
            if unchanged { "unchanged" } else { "modified" }
        ),
    )
}

fn main() {
    let secs = Duration::from_secs;
    let results = [
        run("AC1", "zero-error codec", secs(120), ac1),
        run("AC2", "banded DP matches the quadratic oracle", secs(60), ac2),
        run("AC3", "rate sandwich at n=1e6", secs(300), ac3),
        run("AC4", "simulator edit counts", secs(60), ac4),
        run("AC5", "typicalization properties", secs(60), ac5),
        run("AC6", "post-edit set counts", secs(120), ac6),
        run("AC7", "bound formulas and coder efficiency", secs(60), ac7),
        run("AC8", "alignment tree", secs(180), ac8),
        run("AC9", "sync protocol", secs(60), ac9),
    ];
    let ran: Vec<bool> = results.into_iter().flatten().collect();
    let failed = ran.iter().filter(|&&p| !p).count();
    println!("acceptance: {}/{} criteria pass", ran.len() - failed, ran.len());
    if failed > 0 && std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
        std::process::exit(1);
    }
}
