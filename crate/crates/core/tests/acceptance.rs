//! Acceptance suite: one line per criterion, nonzero exit if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::{Command, ExitCode};
use std::time::Instant;

use qpolar::bitmatrix::{BitMatrix, BitVec};
use qpolar::channel::sample_depolarizing_with;
use qpolar::code::{initial_info_set, validate_css, validate_precoder, CodeSpec, Precoder, QuantumCode};
use qpolar::decoder::{
    binary_sc_decode, binary_scl_decode, is_logical_success, measure_syndrome, quantum_scl_decode, QuantumDecoder,
    SyndromePair,
};
use qpolar::ga::{
    candidate_groups, crossover_sets, mutate_precoder, mutate_set, repair_precoder, ForcedSets, GaConfig, Optimizer,
    SetGenome,
};
use qpolar::gates::{encoder_extra_gates, SyndromeGates};
use qpolar::montecarlo::{parse_csv, run_point};
use qpolar::oracle::{dense_reference_transforms, exhaustive_map_decode};
use qpolar::{ChannelParam, Quad};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Uniform CSS-valid set with one logical pair and `K = N/2 + 1`.
fn random_spec(n_exp: u32, rng: &mut ChaCha8Rng) -> CodeSpec {
    let n = 1usize << n_exp;
    let logical = rng.random_range(0..n / 2);
    let mut info = Vec::new();
    for i in 0..n / 2 {
        let j = n - 1 - i;
        if i == logical {
            info.extend([i, j]);
        } else {
            info.push(if rng.random_bool(0.5) { i } else { j });
        }
    }
    CodeSpec::new(n_exp, info).unwrap()
}

fn random_code(n_exp: u32, rng: &mut ChaCha8Rng) -> QuantumCode {
    let spec = random_spec(n_exp, rng);
    let groups = candidate_groups(&spec, None);
    let rate = rng.random_range(0.0..0.5);
    let t = if rng.random_bool(0.2) {
        Precoder::identity(spec.n())
    } else {
        mutate_precoder(&Precoder::identity(spec.n()), &groups, rate, rng)
    };
    QuantumCode::new(spec, t).unwrap()
}

fn draw(code: &QuantumCode, p: f64, rng: &mut ChaCha8Rng) -> (qpolar::PauliVec, SyndromePair) {
    let noise = sample_depolarizing_with(ChannelParam::new(p).unwrap(), code.n(), rng);
    let s = measure_syndrome(&noise, code).unwrap();
    (noise, s)
}

fn oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut cases = 0;
    let mut max_dpm: f64 = 0.0;
    for n_exp in [2, 3] {
        for _ in 0..20 {
            let code = random_code(n_exp, &mut rng);
            let list = 4usize.pow(code.spec().k() as u32);
            for p in [0.05, 0.1] {
                let param = ChannelParam::new(p).unwrap();
                for _ in 0..200 {
                    let (noise, s) = draw(&code, p, &mut rng);
                    let d = quantum_scl_decode(&s, &code, param, list).map_err(|e| e.to_string())?;
                    let o = exhaustive_map_decode(&s, &code, param).map_err(|e| e.to_string())?;
                    let dpm = (d.pm - o.pm_best).abs();
                    max_dpm = max_dpm.max(dpm);
                    ensure(dpm <= 1e-9, || format!("pm mismatch {} vs {} on N={}", d.pm, o.pm_best, code.n()))?;
                    let a = is_logical_success(&d.s_hat, &noise, &code).unwrap();
                    let b = is_logical_success(&o.s_best, &noise, &code).unwrap();
                    ensure(a == b, || format!("verdict mismatch on N={}", code.n()))?;
                    cases += 1;
                }
            }
        }
    }
    Ok(format!("{cases} cases, max |dpm| = {max_dpm:.2e}"))
}

fn degeneration() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for k in 0..1000 {
        let code = random_code(rng.random_range(2..=6), &mut rng);
        let p = rng.random_range(0.01..0.2);
        let (_, s) = draw(&code, p, &mut rng);
        let dec = QuantumDecoder::new(&code, ChannelParam::new(p).unwrap(), 1).unwrap();
        match (dec.decode(&s), dec.decode_greedy(&s)) {
            (Ok(a), Ok(b)) => ensure(a.s_hat == b.s_hat, || format!("L=1 vs greedy differ on instance {k}"))?,
            (Err(_), Err(_)) => {}
            _ => return Err(format!("L=1 and greedy disagree on failure at instance {k}")),
        }
    }
    for k in 0..300 {
        let spec = random_spec(rng.random_range(2..=7), &mut rng);
        let code = QuantumCode::unprecoded(spec).unwrap();
        let p = rng.random_range(0.01..0.2);
        let param = ChannelParam::new(p).unwrap();
        let (_, s) = draw(&code, p, &mut rng);
        let list = [1, 2, 4, 8][k % 4];
        let a = QuantumDecoder::new(&code, param, list).unwrap().decode(&s).unwrap();
        let b = QuantumDecoder::unprecoded(&code, param, list).unwrap().decode(&s).unwrap();
        ensure(a.s_hat == b.s_hat, || format!("T=I vs unprecoded differ on instance {k}"))?;
    }
    for k in 0..1000 {
        let n_exp = rng.random_range(1..=7);
        let n = 1usize << n_exp;
        let mut idx: Vec<usize> = (0..n).collect();
        idx.shuffle(&mut rng);
        let kk = rng.random_range(1..=n);
        let spec = CodeSpec::new(n_exp, idx[..kk].iter().copied()).unwrap();
        let llrs: Vec<f64> = (0..n).map(|_| rng.random_range(-6.0..6.0)).collect();
        let fv: Vec<bool> = (0..n - kk).map(|_| rng.random_bool(0.5)).collect();
        let frozen = BitVec::from_bools(&fv);
        let sc = binary_sc_decode(&llrs, &spec, &frozen).unwrap();
        let (scl, _) = binary_scl_decode(&llrs, &spec, &frozen, 1).unwrap();
        ensure(sc == scl, || format!("binary L=1 vs SC differ on instance {k}"))?;
    }
    Ok("1000 L=1/greedy, 300 T=I/unprecoded, 1000 binary L=1/SC".into())
}

/// Dense checks independent of the sparse validators.
fn dense_violations(code_spec: &CodeSpec, t: &Precoder) -> Vec<String> {
    let n = code_spec.n();
    let mut out = Vec::new();
    for i in 0..n {
        if !code_spec.is_info(i) && !code_spec.is_info(n - 1 - i) {
            out.push(format!("pair ({i}, {}) frozen", n - 1 - i));
            break;
        }
    }
    let d = t.to_dense();
    let j = BitMatrix::exchange(n);
    if !d.mat_mul(&d).unwrap().is_identity() {
        out.push("T^2 != I".into());
    }
    if d.transpose() != j.mat_mul(&d).unwrap().mat_mul(&j).unwrap() {
        out.push("T^T != JTJ".into());
    }
    for r in 0..n {
        for c in 0..n {
            if r == c || !d.get(r, c) {
                continue;
            }
            if !d.get(n - 1 - c, n - 1 - r) {
                out.push(format!("({r}, {c}) lacks mirror"));
            }
            let base = |a: usize, b: usize| a < b && code_spec.is_info(a) && !code_spec.is_info(b);
            if !(base(r, c) || base(n - 1 - c, n - 1 - r)) {
                out.push(format!("({r}, {c}) breaks sparsity"));
            }
        }
    }
    out
}

fn constraint_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut total = 0;
    for n_exp in [4u32, 6] {
        let mut steps = 0;
        let p = 0.05;
        let seed = initial_info_set(n_exp, p).unwrap();
        let forced = ForcedSets::default_for(&seed, p);
        let n = seed.n();
        let mut pop: Vec<(SetGenome, Precoder)> = vec![(SetGenome::from_spec(&seed).unwrap(), Precoder::identity(n))];
        while steps < 10_000 {
            let a = rng.random_range(0..pop.len());
            let (g, t) = match rng.random_range(0..4) {
                0 => {
                    let g = mutate_set(&pop[a].0, &forced, rng.random_range(0.0..0.3), &mut rng);
                    let t = repair_precoder(&pop[a].1, &g.to_spec());
                    (g, t)
                }
                1 => {
                    let b = rng.random_range(0..pop.len());
                    let g = crossover_sets(&pop[a].0, &pop[b].0, &forced, &mut rng);
                    let t = repair_precoder(&pop[b].1, &g.to_spec());
                    (g, t)
                }
                _ => {
                    let spec = pop[a].0.to_spec();
                    let groups = candidate_groups(&spec, None);
                    let t = mutate_precoder(&pop[a].1, &groups, rng.random_range(0.0..0.3), &mut rng);
                    (pop[a].0.clone(), t)
                }
            };
            let spec = g.to_spec();
            ensure(forced.admits(&spec), || format!("step {steps}: forced sets violated"))?;
            let v = dense_violations(&spec, &t);
            ensure(v.is_empty(), || format!("step {steps} at N={n}: {}", v.join("; ")))?;
            ensure(validate_css(&spec).is_valid() && validate_precoder(&t, &spec).unwrap().is_valid(), || {
                format!("step {steps}: sparse validator disagrees")
            })?;
            if pop.len() < 16 {
                pop.push((g, t));
            } else {
                let k = rng.random_range(0..pop.len());
                pop[k] = (g, t);
            }
            steps += 1;
        }
        total += steps;
    }
    Ok(format!("{total} steps over N=16 and N=64, 0 violations"))
}

fn coset_consistency() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut total = 0;
    for (n_exp, count) in [(4u32, 4000), (6, 4000), (8, 2000)] {
        let mut done = 0;
        while done < count {
            let code = random_code(n_exp, &mut rng);
            let dense = dense_reference_transforms(&code).unwrap();
            let frozen = code.spec().frozen_set();
            let p = rng.random_range(0.01..0.15);
            let list = [1, 4, 8][rng.random_range(0..3)];
            let decoder = QuantumDecoder::new(&code, ChannelParam::new(p).unwrap(), list).unwrap();
            for _ in 0..100 {
                let (_, s) = draw(&code, p, &mut rng);
                let d = decoder.decode(&s).map_err(|e| e.to_string())?;
                let sx = dense.gt.vec_mul(&d.noise.x).unwrap();
                let sz = dense.jgt.vec_mul(&d.noise.z).unwrap();
                let ok = frozen
                    .iter()
                    .enumerate()
                    .all(|(k, &f)| sx.get(f) == s.sx.get(k) && sz.get(f) == s.sz.get(k));
                ensure(ok, || format!("syndrome not reproduced at N={}", code.n()))?;
                done += 1;
            }
        }
        total += done;
    }
    Ok(format!("{total} decodes, 100% reproduced"))
}

fn printed_numbers() -> Outcome {
    let t = BitMatrix::from_rows(&[vec![1, 1], vec![0, 1]]).unwrap();
    let tg = t.mat_mul(&BitMatrix::kernel()).unwrap();
    ensure(tg == BitMatrix::from_rows(&[vec![0, 1], vec![1, 1]]).unwrap(), || format!("TG = {tg:?}"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let upper: Vec<(usize, usize)> = (0..64).flat_map(|i| (i + 1..64).map(move |j| (i, j))).collect();
    for _ in 0..200 {
        let entries: Vec<(usize, usize)> = upper.choose_multiple(&mut rng, 36).copied().collect();
        let t = Precoder::from_entries(64, entries).unwrap();
        ensure(t.nnz() == 100 && encoder_extra_gates(&t) == 36, || "encoder count".into())?;
    }
    let bundled = qpolar::CodeFile::load(concat!(env!("CARGO_MANIFEST_DIR"), "/codes/n64_k2_t100.json"))
        .unwrap()
        .to_code()
        .unwrap();
    ensure(encoder_extra_gates(bundled.precoder()) == 36, || "bundled code".into())?;

    let g = SyndromeGates::from_counts(5550, 5000);
    ensure(g.total_gates == 11100, || format!("total {}", g.total_gates))?;

    for n_exp in 1..=10 {
        let c = QuantumCode::unprecoded(initial_info_set(n_exp, 0.05).unwrap()).unwrap();
        ensure(c.logical_set().len() == 2, || format!("initial code n={n_exp}"))?;
    }
    for _ in 0..1000 {
        let c = random_code(rng.random_range(1..=8), &mut rng);
        ensure(c.logical_set().len() == 2, || "random code".into())?;
    }
    Ok("TG=[[0,1],[1,1]], extra=36, 2*5550=11100, |logical|=2".into())
}

fn list_gain() -> Outcome {
    let code = QuantumCode::unprecoded(initial_info_set(6, 0.05).unwrap()).unwrap();
    let param = ChannelParam::new(0.05).unwrap();
    let l4 = run_point(&code, param, 4, 20_000, 1).map_err(|e| e.to_string())?;
    let l1 = run_point(&code, param, 1, 20_000, 1).map_err(|e| e.to_string())?;
    let msg = format!(
        "L=4 {:.5} [{:.5}, {:.5}]  L=1 {:.5} [{:.5}, {:.5}]",
        l4.ler, l4.ci95_low, l4.ci95_high, l1.ler, l1.ci95_low, l1.ci95_high
    );
    ensure(l4.ler < l1.ler && l4.ci95_high < l1.ci95_low, || msg.clone())?;
    Ok(msg)
}

fn ga_improvement() -> Outcome {
    let cfg = GaConfig::new(6, 0.05, 4, 8, 16, 10, 2000, 2024);
    let seed = initial_info_set(6, 0.05).unwrap();
    let best = Optimizer::new(cfg, seed.clone())
        .and_then(|mut o| o.joint_optimize())
        .map_err(|e| e.to_string())?;
    let param = ChannelParam::new(0.05).unwrap();
    let seed_code = QuantumCode::unprecoded(seed).unwrap();
    let a = run_point(&best.code, param, 4, 50_000, 777).unwrap();
    let b = run_point(&seed_code, param, 4, 50_000, 777).unwrap();
    let ratio = a.ler / b.ler;
    let msg = format!(
        "optimized {:.5} vs seed {:.5}, ratio {ratio:.3}, nnz(T)={}",
        a.ler,
        b.ler,
        best.code.precoder().nnz()
    );
    ensure(ratio <= 0.8, || msg.clone())?;
    Ok(msg)
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let code = concat!(env!("CARGO_MANIFEST_DIR"), "/codes/n64_k2_t100.json");
    let run = |threads: &str, name: &str| -> Result<Vec<qpolar::montecarlo::SimPoint>, String> {
        let out = dir.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_qpolar"))
            .args(["simulate", code, "--p", "0.03,0.06,0.1", "-L", "4", "--trials", "5000", "--seed", "8"])
            .args(["--min-failures", "0", "--threads", threads, "-o"])
            .arg(&out)
            .status()
            .map_err(|e| e.to_string())?;
        ensure(status.success(), || format!("simulate exited with {status}"))?;
        parse_csv(&std::fs::read_to_string(out).unwrap()).map_err(|e| e.to_string())
    };
    let a = run("1", "a.csv")?;
    let b = run("1", "b.csv")?;
    let c = run("8", "c.csv")?;
    let same = |x: &[qpolar::montecarlo::SimPoint], y: &[qpolar::montecarlo::SimPoint]| {
        x.len() == y.len() && x.iter().zip(y).all(|(u, v)| u.same_result(v))
    };
    ensure(same(&a, &b) && same(&a, &c), || "CSV rows differ".into())?;
    Ok(format!("{} rows identical across runs and thread counts", a.len()))
}

/// Upper virtual symbol `a ⊕ b`, lower virtual symbol `(x_b, z_a)`.
fn forward(sa: u8, sb: u8) -> (u8, u8) {
    (sa ^ sb, (sb & 1) | (sa & 2))
}

fn quad_nodes() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut max_err: f64 = 0.0;
    let rand_quad = |rng: &mut ChaCha8Rng| {
        let mut p = [0.0; 4];
        for v in &mut p {
            *v = if rng.random_bool(0.1) { 0.0 } else { rng.random_range(1e-6..1.0) };
        }
        if p.iter().all(|&v| v == 0.0) {
            p[0] = 1.0;
        }
        let s: f64 = p.iter().sum();
        Quad::new(p.map(|v| v / s))
    };
    for _ in 0..100_000 {
        let a = rand_quad(&mut rng);
        let b = rand_quad(&mut rng);
        let mut up = [0.0; 4];
        for sa in 0..4u8 {
            for sb in 0..4u8 {
                up[forward(sa, sb).0 as usize] += a.get(sa) * b.get(sb);
            }
        }
        let tot: f64 = up.iter().sum();
        let c = Quad::combine(&a, &b);
        for s in 0..4u8 {
            max_err = max_err.max((c.get(s) - up[s as usize] / tot).abs());
        }
        let d = rng.random_range(0..4u8);
        let mut low = [0.0; 4];
        for sa in 0..4u8 {
            for sb in 0..4u8 {
                let (u, l) = forward(sa, sb);
                if u == d {
                    low[l as usize] += a.get(sa) * b.get(sb);
                }
            }
        }
        let tot: f64 = low.iter().sum();
        match Quad::split(&a, &b, d) {
            Ok(q) => {
                for s in 0..4u8 {
                    max_err = max_err.max((q.get(s) - low[s as usize] / tot).abs());
                }
            }
            Err(_) => ensure(tot == 0.0, || "split reported degenerate with mass".into())?,
        }
    }
    ensure(max_err <= 1e-12, || format!("max error {max_err:.2e}"))?;
    Ok(format!("100000 pairs, max error {max_err:.2e}"))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("oracle equivalence", oracle_equivalence),
        ("degeneration checks", degeneration),
        ("constraint suite", constraint_suite),
        ("coset consistency", coset_consistency),
        ("printed numbers", printed_numbers),
        ("list gain", list_gain),
        ("GA improvement", ga_improvement),
        ("determinism", determinism),
        ("quaternary nodes", quad_nodes),
    ];
    let only: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        if !only.is_empty() && !only.iter().any(|o| name.contains(o.as_str())) {
            continue;
        }
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panic: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {}. {name} ({secs:.1}s): {detail}", k + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {}. {name} ({secs:.1}s): {detail}", k + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
