//! Acceptance criteria 1–9.
//!
//! Prints indented sub-check lines followed by exactly one `PASS`/`FAIL`
//! line per criterion, and exits non-zero if any criterion fails. Thresholds
//! are fixed; known disagreements with published expressions are reported
//! as failures rather than relaxed.

mod common;

use std::process::Command;

use common::Brute;
use tavis::afa::{afa_eigenvectors, b5_expected, b5_sum, coefficient_sums, s1_afa};
use tavis::closedforms::{eval_closed, ClosedFormId};
use tavis::distributions::{coherent, coherent_with, fock, thermal, PhotonDensity, TailPolicy};
use tavis::dynamics::{make_tlm_state, uniform_grid, Engine, S2Pairing, Scenario};
use tavis::model::{cooperation_numbers, HalfInt};
use tavis::spectral::verify_block;
use tavis::Result;

struct Sub {
    name: String,
    ok: bool,
    detail: String,
}

#[derive(Default)]
struct Criterion {
    subs: Vec<Sub>,
}

impl Criterion {
    fn below(&mut self, name: impl Into<String>, value: f64, tol: f64) {
        self.subs.push(Sub { name: name.into(), ok: value < tol, detail: format!("{value:.3e} < {tol:.1e}") });
    }

    fn above(&mut self, name: impl Into<String>, value: f64, tol: f64) {
        self.subs.push(Sub { name: name.into(), ok: value > tol, detail: format!("{value:.3e} > {tol:.1e}") });
    }

    fn result(&mut self, name: impl Into<String>, r: Result<(f64, f64)>) {
        match r {
            Ok((v, tol)) => self.below(name, v, tol),
            Err(e) => self.subs.push(Sub { name: name.into(), ok: false, detail: format!("error: {e}") }),
        }
    }

    fn info(&mut self, name: impl Into<String>, detail: String) {
        self.subs.push(Sub { name: format!("(info) {}", name.into()), ok: true, detail });
    }

    fn report(&self, id: u32, title: &str) -> bool {
        for s in &self.subs {
            println!("    {} {:<66} {}", if s.ok { "ok  " } else { "FAIL" }, s.name, s.detail);
        }
        let ok = self.subs.iter().all(|s| s.ok);
        println!("{} criterion {id}: {title}", if ok { "PASS" } else { "FAIL" });
        ok
    }
}

fn densities() -> Vec<PhotonDensity> {
    let mut v: Vec<PhotonDensity> = [0, 1, 5, 20].into_iter().map(fock).collect();
    v.push(coherent(10.0).unwrap());
    v
}

fn worst(f: impl Fn(&PhotonDensity) -> Result<f64>) -> Result<f64> {
    densities().iter().map(f).try_fold(0.0f64, |m, r| r.map(|x| m.max(x)))
}

fn criterion1(engine: &Engine) -> Criterion {
    let mut c = Criterion::default();
    let taus = uniform_grid(20.0, 2001).unwrap();
    let printed = engine.clone().with_pairing(S2Pairing::Printed);
    for (n, id, label) in [
        (1, ClosedFormId::S1N1, "S1 N=1 vs 29b"),
        (2, ClosedFormId::S1N2, "S1 N=2 vs 30a"),
        (3, ClosedFormId::S1N3, "S1 N=3 vs C.1"),
        (4, ClosedFormId::S1N4, "S1 N=4 vs C.3 (signs/frequency corrected)"),
    ] {
        c.result(label, worst(|d| Ok(engine.s1_all_up(n, 0.0, d, &taus)?.max_abs_diff(&eval_closed(id, d, 0.0, &taus)?))).map(|v| (v, 1e-8)));
    }
    for (n, id, label) in [
        (1, ClosedFormId::S2N1, "S2 N=1 vs 29a"),
        (2, ClosedFormId::S2N2, "S2 N=2 vs 30b (printed pairing)"),
        (3, ClosedFormId::S2N3, "S2 N=3 vs C.2 (printed pairing)"),
    ] {
        c.result(label, worst(|d| Ok(printed.s2_all_up(n, 0.0, d, &taus)?.max_abs_diff(&eval_closed(id, d, 0.0, &taus)?))).map(|v| (v, 1e-8)));
    }
    c.result(
        "S4 N=2 vs F.9",
        worst(|d| Ok(engine.s4_all_down(2, 0.0, d, &taus)?.max_abs_diff(&eval_closed(ClosedFormId::S4N2, d, 0.0, &taus)?))).map(|v| (v, 1e-8)),
    );
    for delta in [1.0, 25.0] {
        let beta = 2.0 * f64::sqrt(delta);
        c.result(
            format!("S1 N=1 Delta={delta} vs 31a"),
            worst(|d| Ok(engine.s1_all_up(1, beta, d, &taus)?.max_abs_diff(&eval_closed(ClosedFormId::S1N1Nr, d, beta, &taus)?)))
                .map(|v| (v, 1e-8)),
        );
        c.result(
            format!("S2 N=1 Delta={delta} vs 31b (literal)"),
            worst(|d| Ok(engine.s2_all_up(1, beta, d, &taus)?.max_abs_diff(&eval_closed(ClosedFormId::S2N1Nr, d, beta, &taus)?)))
                .map(|v| (v, 1e-8)),
        );
        c.result(
            format!("S4 N=1 Delta={delta} vs F.8"),
            worst(|d| Ok(engine.s4_all_down(1, beta, d, &taus)?.max_abs_diff(&eval_closed(ClosedFormId::S4N1Nr, d, beta, &taus)?)))
                .map(|v| (v, 1e-8)),
        );
    }
    // Cross-check of the default (consistent) pairing against the Schrödinger evolution.
    let d = coherent_with(1.5, TailPolicy { tail_tol: 1e-6, n_trunc: Some(16) }).unwrap();
    let amps: Vec<f64> = d.diag.iter().map(|p| p.sqrt()).collect();
    let short = uniform_grid(20.0, 41).unwrap();
    let mut dev = 0.0f64;
    for n in 1..=3usize {
        let b = Brute::new(n, 20, 0.0);
        let psi = b.product(&amps, &[(0, 1.0)]);
        let s = engine.s2_all_up(n as u32, 0.0, &d, &short).unwrap();
        for (i, &t) in short.iter().enumerate() {
            dev = dev.max((s.at(i) - b.amplitude(&psi, t, 0.0)).norm());
        }
    }
    c.info("S2 consistent pairing vs full tensor model, N<=3", format!("{dev:.3e}"));
    c
}

fn criterion2(engine: &Engine) -> Criterion {
    let mut c = Criterion::default();
    for (nbar, want) in [(1.0, 1.66), (4.0, 1.84), (10.0, 1.93), (100.0, 2.0)] {
        let r = coherent(nbar).and_then(|d| engine.s1_stationary_mean(4, 0.0, &d));
        c.result(format!("stationary mean S1, N=4, coherent {nbar} -> {want}"), r.map(|v| ((v - want).abs(), 0.02)));
    }
    c
}

fn criterion3(engine: &Engine) -> Criterion {
    let mut c = Criterion::default();
    let vac = fock(0);
    let t = 1e-3;
    let taus = [0.0, t];
    let rate = |sc: Scenario| -> Result<f64> {
        let s = engine.ee_general(50, 0.0, &vac, &make_tlm_state(sc, 50)?, &taus)?;
        Ok(s.re()[1] / (t * t))
    };
    c.result("all up, N=50: S1/tau^2 -> 50 (E.6)", rate(Scenario::AllUp).map(|r| ((r / 50.0 - 1.0).abs(), 1e-3)));
    let half = rate(Scenario::HalfUp);
    c.result("half up m=0, N=50: S1/tau^2 -> 625 (E.22)", half.clone().map(|r| ((r / 625.0 - 1.0).abs(), 1e-3)));
    if let Ok(r) = half {
        c.info("half up exact rate (N/2)(N/2+1) = 650", format!("{r:.6}"));
    }
    let grid = uniform_grid(20.0, 2001).unwrap();
    for (sc, label, scale) in [(Scenario::OneUpSpecified, "E.10", 1.0 / 16.0), (Scenario::OneUpDicke, "E.13", 1.0)] {
        let r = (|| {
            let s = engine.ee_general(16, 0.0, &vac, &make_tlm_state(sc, 16)?, &grid)?;
            Ok(s.tau
                .iter()
                .zip(s.re())
                .map(|(&t, v)| (v - scale * (4.0 * t).sin().powi(2)).abs())
                .fold(0.0, f64::max))
        })();
        c.result(format!("{sc}, N=16 vs {label}"), r.map(|v| (v, 1e-12)));
    }
    c
}

fn criterion4(engine: &Engine) -> Criterion {
    let mut c = Criterion::default();
    let vac = fock(0);
    let taus = uniform_grid(20.0, 2001).unwrap();
    for n in [3u32, 8, 20] {
        let r = (|| {
            let s = engine.ee_general(n, 0.0, &vac, &make_tlm_state(Scenario::TwoUpSpecified, n)?, &taus)?;
            let lit = eval_closed(ClosedFormId::TwoUp { n_tlm: n }, &vac, 0.0, &taus)?;
            let nf = n as f64;
            let fixed = s
                .tau
                .iter()
                .zip(s.re().iter().zip(lit.re()))
                .map(|(&t, (v, l))| {
                    let shift = 2.0 / nf * ((nf - 2.0).sqrt() * t).sin().powi(2) - 2.0 / nf * ((nf - 1.0).sqrt() * t).sin().powi(2);
                    (v - (l + shift)).abs()
                })
                .fold(0.0, f64::max);
            Ok((s.max_abs_diff(&lit), fixed))
        })();
        c.result(format!("two up specified, N={n} vs E.19"), r.clone().map(|(v, _)| (v, 1e-8)));
        if let Ok((_, fixed)) = r {
            c.info(format!("N={n} vs E.19 with sqrt(N-2) in the last term"), format!("{fixed:.3e}"));
        }
    }
    c
}

fn criterion5(engine: &Engine) -> Criterion {
    let mut c = Criterion::default();
    let mut orth = 0.0f64;
    let mut res = 0.0f64;
    let mut sym = 0.0f64;
    let mut blocks = 0usize;
    for n in 1..=10u32 {
        for r in cooperation_numbers(n) {
            for k in 0..=200i64 {
                for beta in [0.0, 10.0] {
                    let c_ = HalfInt::from_int(k) - r;
                    let es = engine.cache().get(r, c_, beta).unwrap();
                    let d = verify_block(&es);
                    orth = orth.max(d.orthonormality);
                    res = res.max(d.eigen_residual);
                    if beta == 0.0 {
                        sym = sym.max(d.symmetry);
                    }
                    blocks += 1;
                }
            }
        }
    }
    c.info("blocks checked", format!("{blocks}"));
    c.below("orthonormality", orth, 1e-10);
    c.below("eigen-residual", res, 1e-10);
    c.below("resonant symmetry q_j + q_(d-1-j)", sym, 1e-10);
    let taus = uniform_grid(20.0, 2001).unwrap();
    let mut im = 0.0f64;
    for n in 1..=10 {
        let s = engine.s2_all_up(n, 0.0, &coherent(10.0).unwrap(), &taus).unwrap();
        im = im.max(s.im().iter().fold(0.0, |m, x| m.max(x.abs())));
    }
    c.below("Im S2 at resonance, N<=10, coherent 10", im, 1e-10);
    let mut th = 0.0f64;
    for n in [1u32, 4, 10] {
        let s = engine.s2_all_up(n, 1.0, &thermal(5.0).unwrap(), &taus).unwrap();
        th = th.max((0..s.len()).map(|i| s.at(i).norm()).fold(0.0, f64::max));
    }
    c.subs.push(Sub { name: "thermal S2 identically zero".into(), ok: th == 0.0, detail: format!("{th:e} == 0") });
    c
}

fn criterion6(engine: &Engine) -> Criterion {
    let mut c = Criterion::default();
    let mut b5 = 0.0f64;
    let mut orth = 0.0f64;
    for n in 1..=10u32 {
        for bb in [0.0, 1.0, 10.0] {
            for j in 0..n {
                b5 = b5.max((b5_sum(n, j, bb).unwrap() - b5_expected(n, j, bb)).abs());
            }
            let a = afa_eigenvectors(n, bb);
            for i in 0..a.len() {
                for j in i..a.len() {
                    let dot: f64 = (0..a.len()).map(|p| a[p][i] * a[p][j]).sum();
                    orth = orth.max((dot - if i == j { 1.0 } else { 0.0 }).abs());
                }
            }
        }
    }
    c.below("B.5 identity, N<=10, all j, beta_bar in {0,1,10}", b5, 1e-10);
    c.below("AFA eigenvector orthonormality", orth, 1e-10);
    let taus = uniform_grid(10.0, 2001).unwrap();
    let d = fock(10_000);
    let dev = engine.s1_all_up(4, 0.0, &d, &taus).unwrap().max_abs_diff(&s1_afa(4, 0.0, &d, &taus).unwrap());
    c.below("max |s1_afa - s1_exact|, N=4, fock(1e4), tau<=10", dev, 0.08);

    // Coefficient sums: gap 1 approaches -N/4, larger gaps vanish, as n grows.
    for beta in [0.0, 10.0] {
        let at = |n: u64, k: i32| coefficient_sums(engine.cache(), 4, beta, n, k).unwrap().s1_sum.unwrap();
        let k1: Vec<f64> = [100, 1000, 5000].iter().map(|&n| (at(n, 1) + 1.0).abs()).collect();
        c.below(format!("B3 pattern, beta={beta}: |sum_k1 + N/4| at n=5000"), k1[2], 1e-2);
        c.subs.push(Sub {
            name: format!("B3 pattern, beta={beta}: k=1 deviation shrinks with n"),
            ok: k1[0] > k1[1] && k1[1] > k1[2],
            detail: format!("{:.2e} > {:.2e} > {:.2e}", k1[0], k1[1], k1[2]),
        });
        let k2: f64 = (2..=4).map(|k| at(5000, k).abs()).fold(0.0, f64::max);
        c.below(format!("B3 pattern, beta={beta}: max |sum_k| for k>=2 at n=5000"), k2, 1e-2);
    }
    for k in [0, 1] {
        let s = coefficient_sums(engine.cache(), 10, 10.0, 5000, k).unwrap();
        c.below(format!("B4 pattern, N=10, beta=10, k={k}: relative gap to AFA at n=5000"), ((s.s2_sum - s.s2_afa) / s.s2_afa).abs(), 1e-2);
    }
    c
}

fn criterion7(engine: &Engine) -> Criterion {
    let mut c = Criterion::default();
    let d = coherent(100.0).unwrap();
    let taus = uniform_grid(70.0, 7001).unwrap();
    let s = engine.s1_all_up(1, 0.0, &d, &taus).unwrap();
    let dev = |lo: f64, hi: f64| {
        s.tau.iter().zip(s.re()).filter(|(t, _)| **t >= lo && **t <= hi).map(|(_, v)| (v - 0.5).abs()).fold(0.0, f64::max)
    };
    c.below("collapse: max |S1 - 1/2| on [3, 40]", dev(3.0, 40.0), 0.1);
    c.above("revival: max |S1 - 1/2| on [55, 70]", dev(55.0, 70.0), 0.2);
    c
}

fn run_preset(name: &str, dir: &std::path::Path, threads: Option<usize>) -> std::result::Result<Vec<u8>, String> {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_tavis"));
    cmd.args(["preset", name, "--output-dir"]).arg(dir);
    if let Some(t) = threads {
        cmd.args(["--threads", &t.to_string()]);
    }
    let o = cmd.output().map_err(|e| e.to_string())?;
    if !o.status.success() {
        return Err(format!("exit {:?}: {}", o.status.code(), String::from_utf8_lossy(&o.stderr)));
    }
    std::fs::read(dir.join(format!("{name}.csv"))).map_err(|e| e.to_string())
}

fn criterion8() -> Criterion {
    let mut c = Criterion::default();
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for threads in [1, 4, 8] {
        for _ in 0..2 {
            match run_preset("fig1", dir.path(), Some(threads)) {
                Ok(bytes) => outputs.push((threads, bytes)),
                Err(e) => c.subs.push(Sub { name: format!("fig1 with {threads} threads"), ok: false, detail: e }),
            }
        }
    }
    if let Some((_, first)) = outputs.first() {
        for (threads, bytes) in &outputs {
            c.subs.push(Sub {
                name: format!("fig1 CSV with {threads} threads identical to 1-thread run"),
                ok: bytes == first,
                detail: format!("{} bytes", bytes.len()),
            });
        }
    }
    c
}

fn criterion9() -> Criterion {
    let mut c = Criterion::default();
    let dir = tempfile::tempdir().unwrap();
    // (preset, N, columns that describe emission)
    let cases: [(&str, f64, &[&str]); 5] = [
        ("fig1", 4.0, &["exact_resonant", "afa_resonant", "exact_delta25", "afa_delta25"]),
        ("fig2", 4.0, &["exact", "afa"]),
        ("figE1", 50.0, &["ee"]),
        ("figE2", 50.0, &["ee"]),
        ("figF1", 10.0, &["fock4_all_up", "coherent4_all_up"]),
    ];
    for (name, n, cols) in cases {
        match run_preset(name, dir.path(), None) {
            Ok(bytes) => {
                let text = String::from_utf8(bytes).unwrap();
                let mut lines = text.lines().filter(|l| !l.starts_with('#'));
                let header: Vec<&str> = lines.next().unwrap_or("").split(',').collect();
                let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
                for col in cols {
                    let Some(k) = header.iter().position(|h| h == col) else {
                        c.subs.push(Sub { name: format!("{name}/{col}"), ok: false, detail: "missing column".into() });
                        continue;
                    };
                    let (lo, hi) = rows.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), r| (a.min(r[k]), b.max(r[k])));
                    c.above(format!("{name}/{col}: value range vs 0.1 N"), hi - lo, 0.1 * n);
                }
            }
            Err(e) => c.subs.push(Sub { name: format!("preset {name} exits 0"), ok: false, detail: e }),
        }
    }
    c
}

fn main() {
    let engine = Engine::new();
    let titles = [
        "closed-form oracle equivalence",
        "stationary means",
        "short-time laws",
        "two-up suppression (E.19)",
        "resonance structure",
        "AFA identities and convergence",
        "collapse and revival",
        "determinism across thread counts",
        "preset smoke runs",
    ];
    let mut passed = 0;
    for (i, title) in titles.iter().enumerate() {
        let c = match i + 1 {
            1 => criterion1(&engine),
            2 => criterion2(&engine),
            3 => criterion3(&engine),
            4 => criterion4(&engine),
            5 => criterion5(&engine),
            6 => criterion6(&engine),
            7 => criterion7(&engine),
            8 => criterion8(),
            _ => criterion9(),
        };
        passed += c.report(i as u32 + 1, title) as usize;
    }
    println!("acceptance: {passed}/{} criteria pass", titles.len());
    if passed != titles.len() {
        std::process::exit(1);
    }
}
