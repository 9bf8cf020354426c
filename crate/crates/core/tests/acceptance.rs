//! End-to-end acceptance checks against dense oracles. Prints one line per
//! criterion. Invariant checks failing makes the run fail; the qualitative
//! reproductions of published experiments (criteria 5 to 8) are reported
//! only.

mod common;

use std::sync::mpsc;
use std::time::{Duration, Instant};

use common::{dense, eig, general_precond_kappa, instance, kappa, median, precond_kappa, spearman};
use nalgebra::DMatrix;
use precond_core::{
    dual_diag, estimate_condition_number, extract_feasible, gaussian_rhs, iterate_preconditioner, jacobi,
    lambda_min_lower_bound, lanczos_both, optimize_in_subspace, pcg_solve, pricing, random_subspace, ruiz,
    solve_lp, solve_subspace_sdp, sparsity_score, Basis, DiagonalVec, EntryDist, IterateConfig, LanczosConfig,
    LpProblem, LpStatus, PricingNorm, RowOrigin, ScoreConfig, SipConfig, SipStatus, SparseSymMatrix,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

struct Outcome {
    id: &'static str,
    pass: bool,
    reported: bool,
    detail: String,
}

fn report(out: &mut Vec<Outcome>, id: &'static str, pass: bool, reported: bool, detail: String) {
    let tag = match (pass, reported) {
        (true, _) => "PASS",
        (false, false) => "FAIL",
        (false, true) => "FAIL (reported)",
    };
    println!("[{tag}] criterion {id}: {detail}");
    out.push(Outcome { id, pass, reported, detail });
}

fn dist(i: usize) -> EntryDist {
    if i.is_multiple_of(2) {
        EntryDist::Uniform01
    } else {
        EntryDist::StdNormal
    }
}

fn sip_cfg(seed: u64) -> SipConfig {
    SipConfig {
        seed,
        ..SipConfig::default()
    }
}

/// Worst `κ_dense(extracted) / κ_bound − 1` over certified runs.
#[derive(Default)]
struct CertStats {
    runs: usize,
    violations: usize,
    worst: f64,
}

impl CertStats {
    fn add(&mut self, dense_kappa: f64, bound: f64) {
        self.runs += 1;
        let excess = dense_kappa / bound - 1.0;
        self.worst = self.worst.max(excess);
        if excess > 1e-6 {
            self.violations += 1;
        }
    }
}

fn criterion_1(out: &mut Vec<Outcome>, cert: &mut CertStats) {
    let t = Instant::now();
    let sizes = [10, 30, 100, 200];
    let sigmas = [0.2, 0.5, 1.0];
    let alphas = [0.05, 0.5];
    let mut worst = 0.0f64;
    let mut failures = 0;
    for i in 0..50 {
        let n = sizes[i % 4];
        let m = instance(n, sigmas[i % 3], alphas[(i / 4) % 2], dist(i / 2), 100 + i as u64);
        let cfg = sip_cfg(i as u64);
        let want = kappa(&m);
        let est = match estimate_condition_number(&m, &cfg) {
            Ok(e) => e,
            Err(e) => {
                println!("    instance {i} (n={n}): error {e}");
                failures += 1;
                continue;
            }
        };
        let rel = (est.kappa - want).abs() / want;
        worst = worst.max(rel);
        if rel > 1e-6 || est.sip.status != SipStatus::Converged {
            failures += 1;
            println!("    instance {i} (n={n}): κ̂={:.10e} κ={want:.10e} rel={rel:.2e} {:?}", est.kappa, est.sip.status);
        }
        if est.sip.status == SipStatus::Converged {
            let basis = Basis::new(vec![DiagonalVec::ones(n)]).expect("single vector");
            let (lb, _) = lambda_min_lower_bound(&m, &cfg.lanczos).expect("SPD instance");
            match extract_feasible(&est.sip, &basis, &m, lb, &cfg.lanczos) {
                Ok(ex) if ex.tau_prime > 0.0 => {
                    let d = basis.combine(&ex.z_prime);
                    cert.add(precond_kappa(&m, &d), 1.0 / ex.tau_prime);
                }
                Ok(_) => println!("    instance {i}: nonpositive extracted τ′"),
                Err(e) => {
                    cert.violations += 1;
                    println!("    instance {i}: extraction failed: {e}");
                }
            }
        }
    }
    let secs = t.elapsed().as_secs_f64();
    report(
        out,
        "1",
        failures == 0 && secs < 120.0,
        false,
        format!("50 instances, max relative error {worst:.2e} (tol 1e-6), {failures} failures, {secs:.1}s (limit 120s)"),
    );
}

fn criterion_2(out: &mut Vec<Outcome>, cert: &mut CertStats) {
    let t = Instant::now();
    let sizes = [10, 20, 30, 50];
    let mut failures = 0;
    let mut min_margin = f64::INFINITY;
    for i in 0..20 {
        let n = sizes[i % 4];
        let m = instance(n, [0.3, 0.6][i % 2], 0.1, dist(i / 4), 200 + i as u64);
        let ones = DiagonalVec::ones(n);
        let jac = jacobi(&m).expect("SPD");
        let rz = ruiz(&m, 10, 1e-6).expect("SPD");
        let best_single = [&ones, &jac, &rz]
            .iter()
            .map(|d| precond_kappa(&m, d.as_slice()))
            .fold(f64::INFINITY, f64::min);
        let basis = Basis::new_dedup(vec![ones, jac, rz]).expect("nonempty basis");
        match optimize_in_subspace(&m, &basis, &sip_cfg(i as u64)) {
            Ok(res) => {
                let margin = best_single + 1e-6 - res.kappa_bound;
                min_margin = min_margin.min(margin);
                if margin < 0.0 {
                    failures += 1;
                    println!("    instance {i}: bound {:.10e} > best single {best_single:.10e}", res.kappa_bound);
                }
                if res.certified {
                    cert.add(precond_kappa(&m, res.d.as_slice()), res.kappa_bound);
                } else {
                    println!("    instance {i}: bound not certified");
                }
            }
            Err(e) => {
                failures += 1;
                println!("    instance {i}: error {e}");
            }
        }
    }
    let secs = t.elapsed().as_secs_f64();
    report(
        out,
        "2",
        failures == 0 && secs < 60.0,
        false,
        format!("20 instances, {failures} dominance violations, smallest slack {min_margin:.3e}, {secs:.1}s (limit 60s)"),
    );
}

fn criterion_3(out: &mut Vec<Outcome>, cert: &CertStats) {
    report(
        out,
        "3",
        cert.violations == 0 && cert.runs > 0,
        false,
        format!(
            "{} certified runs, worst dense κ / bound − 1 = {:.2e} (tol 1e-6), {} violations",
            cert.runs, cert.worst, cert.violations
        ),
    );
}

fn criterion_4(out: &mut Vec<Outcome>) {
    let t = Instant::now();
    let mut violations = 0;
    let mut raw_regressions = 0;
    let mut errors = 0;
    let mut total_gain = Vec::new();
    for seed in 0..20u64 {
        let m = instance(30, 0.3, 1e-2, dist(seed as usize), 400 + seed);
        let cfg = IterateConfig {
            sip: sip_cfg(seed),
            iterations: 5,
            ..IterateConfig::default()
        };
        let d0 = jacobi(&m).expect("SPD");
        match iterate_preconditioner(&m, &d0, &cfg) {
            Ok((res, trace)) => {
                for w in trace.records.windows(2) {
                    if w[1].kappa_bound > w[0].kappa_bound * (1.0 + 1e-8) {
                        violations += 1;
                    }
                    if w[1].round_kappa > w[0].round_kappa * (1.0 + 1e-8) {
                        raw_regressions += 1;
                    }
                }
                let kj = precond_kappa(&m, d0.as_slice());
                total_gain.push(kj / res.kappa_bound);
            }
            Err(e) => {
                errors += 1;
                println!("    seed {seed}: error {e}");
            }
        }
    }
    let secs = t.elapsed().as_secs_f64();
    let med_gain = median(&mut total_gain);
    report(
        out,
        "4",
        violations == 0 && errors == 0,
        false,
        format!(
            "20 seeds × T=5: {violations} monotonicity violations, {raw_regressions} per-solve regressions, \
             median κ(Jacobi)/κ(final) = {med_gain:.3}, {secs:.1}s"
        ),
    );
}

fn criterion_5(out: &mut Vec<Outcome>) {
    let t = Instant::now();
    let kmax = 15;
    let mut all_ok = true;
    let mut lines = Vec::new();
    for (dname, d) in [("uniform", EntryDist::Uniform01), ("normal", EntryDist::StdNormal)] {
        for sigma in [0.3, 1.0] {
            let mut kappas = vec![Vec::new(); kmax + 1];
            let mut unconverged = 0;
            for seed in 0..20u64 {
                let m = instance(30, sigma, 1e-5, d, 500 + seed);
                for (k, slot) in kappas.iter_mut().enumerate() {
                    let basis = random_subspace(30, k, 9000 + seed).expect("independent draws");
                    let cfg = SipConfig {
                        max_rounds: 2000,
                        ..sip_cfg(seed)
                    };
                    let sol = solve_subspace_sdp(&m, &basis, &cfg).expect("cutting-plane solve");
                    if sol.status != SipStatus::Converged {
                        unconverged += 1;
                    }
                    slot.push(1.0 / sol.tau_hat);
                }
            }
            let med: Vec<f64> = kappas.iter().map(|v| median(&mut v.clone())).collect();
            let mut improvements = Vec::new();
            for k in 0..kmax {
                let mut diffs: Vec<f64> = kappas[k].iter().zip(&kappas[k + 1]).map(|(a, b)| a - b).collect();
                improvements.push(median(&mut diffs));
            }
            let mono = med.windows(2).filter(|w| w[1] > w[0] * (1.0 + 1e-6)).count();
            let sub = improvements.windows(2).filter(|w| w[1] > w[0] * (1.0 + 1e-6)).count();
            all_ok &= mono == 0 && sub == 0 && unconverged == 0;
            let half = kmax / 2;
            let early: f64 = improvements[..half].iter().sum::<f64>() / half as f64;
            let late: f64 = improvements[kmax - half..].iter().sum::<f64>() / half as f64;
            lines.push(format!(
                "{dname} σ={sigma}: median κ {:.3e} → {:.3e}, {mono} median increases, {sub} improvement increases \
                 (mean improvement first/last {half} steps {early:.3e}/{late:.3e}), {unconverged} unconverged",
                med[0], med[kmax]
            ));
            println!(
                "    {dname} σ={sigma} median κ_k: {}",
                med.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>().join(" ")
            );
            println!(
                "    {dname} σ={sigma} median Δκ_k: {}",
                improvements.iter().map(|x| format!("{x:.2e}")).collect::<Vec<_>>().join(" ")
            );
        }
    }
    let secs = t.elapsed().as_secs_f64();
    report(
        out,
        "5",
        all_ok && secs < 300.0,
        true,
        format!("{}; {secs:.1}s (limit 300s)", lines.join("; ")),
    );
}

fn first_feasible(trace: &[precond_core::SipRound], block2: bool) -> Option<usize> {
    trace
        .iter()
        .find(|r| (if block2 { r.lam_min_block2 } else { r.lam_min_block1 }) >= -1e-10)
        .map(|r| r.round)
}

fn criterion_6(out: &mut Vec<Outcome>) -> Vec<f64> {
    let t = Instant::now();
    let mut within = 0;
    let mut block2_first = 0;
    let mut rows = Vec::new();
    let mut times = Vec::new();
    for seed in 0..10u64 {
        let m = instance(1000, 0.1, 1e-3, EntryDist::Uniform01, 600 + seed);
        let basis = Basis::new(vec![DiagonalVec::ones(1000), DiagonalVec::new(m.diagonal()).unwrap()]).unwrap();
        let ts = Instant::now();
        let sol = solve_subspace_sdp(&m, &basis, &sip_cfg(seed)).expect("cutting-plane solve");
        times.push(ts.elapsed().as_secs_f64());
        let r1 = first_feasible(&sol.trace, false);
        let r2 = first_feasible(&sol.trace, true);
        if r1.is_some_and(|r| r <= 40) && r2.is_some_and(|r| r <= 40) {
            within += 1;
        }
        if let (Some(a), Some(b)) = (r1, r2) {
            if b <= a {
                block2_first += 1;
            }
        }
        rows.push(format!("{}/{}", r1.map_or("-".into(), |r| r.to_string()), r2.map_or("-".into(), |r| r.to_string())));
    }
    let secs = t.elapsed().as_secs_f64();
    report(
        out,
        "6",
        within == 10 && block2_first >= 7,
        true,
        format!(
            "n=1000 σ=0.1: {within}/10 seeds feasible within 40 rounds, block 2 no later on {block2_first}/10 \
             (rounds block1/block2: {}), {secs:.1}s",
            rows.join(" ")
        ),
    );
    times
}

fn criterion_7(out: &mut Vec<Outcome>, sigma01_times: &[f64]) {
    let run_precondition = |m: &SparseSymMatrix| -> (f64, String) {
        let t = Instant::now();
        let basis = Basis::new(vec![DiagonalVec::ones(m.n()), jacobi(m).unwrap()]).unwrap();
        let r = optimize_in_subspace(m, &basis, &sip_cfg(1));
        let secs = t.elapsed().as_secs_f64();
        let what = match r {
            Ok(r) => format!("κ bound {:.4e}", r.kappa_bound),
            Err(e) => format!("error {e}"),
        };
        (secs, what)
    };
    let small = instance(1000, 0.0025, 1e-3, EntryDist::Uniform01, 7);
    let (secs_small, what_small) = run_precondition(&small);
    let literal = instance(1000, 0.1, 1e-3, EntryDist::Uniform01, 7);
    let (secs_lit, what_lit) = run_precondition(&literal);
    let worst_sip = sigma01_times.iter().copied().fold(0.0, f64::max);
    let (tx, rx) = mpsc::channel();
    let started = Instant::now();
    std::thread::spawn(move || {
        let m = instance(100_000, 1e-4, 1e-3, EntryDist::Uniform01, 7);
        let nnz = m.nnz();
        let basis = Basis::new(vec![DiagonalVec::ones(m.n()), jacobi(&m).unwrap()]).unwrap();
        let r = optimize_in_subspace(&m, &basis, &sip_cfg(1));
        let _ = tx.send((nnz, r.map(|r| r.kappa_bound).map_err(|e| e.to_string())));
    });
    let big = rx.recv_timeout(Duration::from_secs(120));
    let secs_big = started.elapsed().as_secs_f64();
    let big_text = match &big {
        Ok((nnz, Ok(k))) => format!("n=1e5 σ=1e-4 (nnz {nnz}) finished in {secs_big:.1}s, κ bound {k:.4e}"),
        Ok((nnz, Err(e))) => format!("n=1e5 σ=1e-4 (nnz {nnz}) failed after {secs_big:.1}s: {e}"),
        Err(_) => "n=1e5 σ=1e-4 did not finish within 120s".to_string(),
    };
    let pass = secs_small < 5.0 && secs_lit < 5.0 && matches!(big, Ok((_, Ok(_)))) && secs_big < 120.0;
    report(
        out,
        "7",
        pass,
        true,
        format!(
            "n=1e3 σ=2.5e-3 (nnz {}) {secs_small:.2}s [{what_small}]; n=1e3 σ=0.1 (nnz {}) {secs_lit:.2}s [{what_lit}], \
             slowest σ=0.1 cutting-plane solve in criterion 6 {worst_sip:.1}s; {big_text} (limits 5s / 120s)",
            small.nnz(),
            literal.nnz()
        ),
    );
}

fn criterion_8(out: &mut Vec<Outcome>) {
    let t = Instant::now();
    let mut iterative_wins = 0;
    let mut both_beat_none = 0;
    let mut rows = Vec::new();
    for seed in 0..5u64 {
        let m = instance(500, 0.02, 1e-3, EntryDist::Uniform01, 800 + seed);
        let b = gaussian_rhs(&m, seed);
        let jac = jacobi(&m).unwrap();
        let cfg = IterateConfig {
            sip: sip_cfg(seed),
            ..IterateConfig::default()
        };
        let (it, _) = iterate_preconditioner(&m, &jac, &cfg).expect("iteration");
        let count = |d: &DiagonalVec| {
            let r = pcg_solve(&m, &b, d, 1e-10, 200_000, 0).expect("pcg");
            if r.converged { r.matvecs } else { usize::MAX }
        };
        let none = count(&DiagonalVec::ones(500));
        let cj = count(&jac);
        let ci = count(&it.d);
        if ci <= cj {
            iterative_wins += 1;
        }
        if ci <= none && cj <= none {
            both_beat_none += 1;
        }
        rows.push(format!("{ci}/{cj}/{none}"));
    }
    let secs = t.elapsed().as_secs_f64();
    report(
        out,
        "8",
        iterative_wins >= 4 && both_beat_none == 5,
        true,
        format!(
            "PCG matvecs iterative/jacobi/none: {}; iterative ≤ jacobi on {iterative_wins}/5, both ≤ none on {both_beat_none}/5, {secs:.1}s",
            rows.join(" ")
        ),
    );
}

fn criterion_9(out: &mut Vec<Outcome>) {
    let t = Instant::now();
    let mut worst = 0.0f64;
    let mut used = 0;
    let mut seed = 900u64;
    let mut fails = 0;
    while used < 20 {
        seed += 1;
        let n = [10, 20, 30, 50][used % 4];
        let m = instance(n, 0.5, 0.1, dist(used), seed);
        let (vals, vecs) = eig(&dense(&m));
        let scale = vals[n - 1];
        if vals[1] - vals[0] < 1e-3 * scale || vals[n - 1] - vals[n - 2] < 1e-3 * scale {
            continue;
        }
        used += 1;
        let basis = Basis::new(vec![DiagonalVec::ones(n)]).unwrap();
        let sol = solve_subspace_sdp(&m, &basis, &sip_cfg(seed)).expect("cutting-plane solve");
        let g = match dual_diag(&sol) {
            Ok(g) => g.into_inner(),
            Err(e) => {
                fails += 1;
                println!("    seed {seed}: {e}");
                continue;
            }
        };
        let h: Vec<f64> = (0..n).map(|i| vecs[(i, 0)].powi(2) - vecs[(i, n - 1)].powi(2)).collect();
        let ng = g.iter().map(|x| x * x).sum::<f64>().sqrt();
        let nh = h.iter().map(|x| x * x).sum::<f64>().sqrt();
        let err = g.iter().zip(&h).map(|(a, b)| (a / ng - b / nh).powi(2)).sum::<f64>().sqrt();
        worst = worst.max(err);
        if err > 1e-5 {
            fails += 1;
        }
    }
    let mut rhos = Vec::new();
    for s in 0..5u64 {
        let m = instance(8, 0.6, 1e-2, EntryDist::StdNormal, 950 + s);
        let a = dense(&m);
        let score = sparsity_score(&m, &ScoreConfig::default()).expect("score");
        let k0 = common::kappa_dense(&a);
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for i in 0..8 {
            for j in i + 1..8 {
                let mut best = k0;
                for step in 0..=400 {
                    let tt = -0.995 + 1.99 * step as f64 / 400.0;
                    let mut p = DMatrix::identity(8, 8);
                    p[(i, j)] = tt;
                    p[(j, i)] = tt;
                    best = best.min(general_precond_kappa(&a, &p));
                }
                xs.push(score.get(i, j).unwrap());
                ys.push(k0 - best);
            }
        }
        rhos.push(spearman(&xs, &ys));
    }
    let secs = t.elapsed().as_secs_f64();
    report(
        out,
        "9",
        fails == 0 && rhos.iter().all(|&r| r > 0.0),
        false,
        format!(
            "dual diagonal vs vmin∘vmin − vmax∘vmax on 20 instances: worst distance {worst:.2e} (tol 1e-5), {fails} failures; \
             8×8 Spearman per instance: {}; {secs:.1}s",
            rhos.iter().map(|r| format!("{r:.3}")).collect::<Vec<_>>().join(", ")
        ),
    );
}

fn random_lp(rng: &mut ChaCha8Rng) -> LpProblem {
    let p = rng.random_range(2..=6);
    let m = rng.random_range(p + 1..=3 * p + 5);
    let x0: Vec<f64> = (0..p).map(|_| StandardNormal.sample(rng)).collect();
    let rows: Vec<Vec<f64>> = (0..m).map(|_| (0..p).map(|_| StandardNormal.sample(rng)).collect()).collect();
    let y0: Vec<f64> = (0..m).map(|_| if rng.random_bool(0.5) { rng.random::<f64>() } else { 0.0 }).collect();
    let mut c = vec![0.0; p];
    for (row, y) in rows.iter().zip(&y0) {
        c.iter_mut().zip(row).for_each(|(c, a)| *c += y * a);
    }
    let mut lp = LpProblem::new(c);
    for row in rows {
        let ax: f64 = row.iter().zip(&x0).map(|(a, x)| a * x).sum();
        lp.push_row(row, ax + rng.random::<f64>(), RowOrigin::Auxiliary);
    }
    lp
}

fn criterion_10(out: &mut Vec<Outcome>) {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut lp_worst = 0.0f64;
    let mut lp_fail = 0;
    for _ in 0..100 {
        let lp = random_lp(&mut rng);
        let sol = match solve_lp(&lp, 1e-10) {
            Ok(s) if s.status == LpStatus::Optimal => s,
            other => {
                lp_fail += 1;
                println!("    LP not optimal: {:?}", other.map(|s| s.status));
                continue;
            }
        };
        let scale = 1.0 + lp.b.iter().chain(&lp.c).fold(0.0f64, |a, x| a.max(x.abs()));
        let mut worst = 0.0f64;
        for (i, row) in lp.a.iter().enumerate() {
            let slack = lp.b[i] - row.iter().zip(&sol.x).map(|(a, x)| a * x).sum::<f64>();
            worst = worst.max(-slack).max((sol.y[i] * slack).abs());
        }
        for j in 0..lp.n_vars() {
            let aty: f64 = lp.a.iter().zip(&sol.y).map(|(r, y)| r[j] * y).sum();
            worst = worst.max((aty - lp.c[j]).abs());
        }
        let by: f64 = lp.b.iter().zip(&sol.y).map(|(b, y)| b * y).sum();
        worst = worst.max((by - sol.objective).abs());
        worst /= scale;
        lp_worst = lp_worst.max(worst);
        if worst > 1e-8 || sol.y.iter().any(|&y| y < 0.0) {
            lp_fail += 1;
        }
    }
    let mut eig_worst = 0.0f64;
    for (i, n) in [20, 50, 100, 200, 35, 80, 150, 200].into_iter().enumerate() {
        let m = instance(n, 0.3, 0.1, dist(i), 1000 + i as u64);
        let (vals, vecs) = eig(&dense(&m));
        let cfg = LanczosConfig {
            seed: i as u64,
            ..LanczosConfig::default()
        };
        let p = lanczos_both(&m, &cfg).expect("lanczos");
        for (got, want_val, col) in [(&p.smallest, vals[0], 0), (&p.largest, vals[n - 1], n - 1)] {
            let scale = vals[n - 1].abs();
            let verr = (got.value - want_val).abs() / want_val.abs();
            let dotp: f64 = (0..n).map(|r| got.vector[r] * vecs[(r, col)]).sum();
            let verr_vec = (0..n)
                .map(|r| (got.vector[r] - dotp.signum() * vecs[(r, col)]).powi(2))
                .sum::<f64>()
                .sqrt();
            let gap = if col == 0 { vals[1] - vals[0] } else { vals[n - 1] - vals[n - 2] };
            eig_worst = eig_worst.max(verr).max(verr_vec * gap / scale);
        }
    }
    let mut pr_fail = 0;
    let mut grng = ChaCha8Rng::seed_from_u64(11);
    for p in [PricingNorm::L1, PricingNorm::L2, PricingNorm::Linf] {
        let g: Vec<f64> = (0..10).map(|_| StandardNormal.sample(&mut grng)).collect();
        let gd = DiagonalVec::new(g.clone()).unwrap();
        let best = pricing(&gd, p).unwrap();
        let val = |d: &[f64]| d.iter().zip(&g).map(|(a, b)| a * b).sum::<f64>();
        let pnorm = |d: &[f64]| match p {
            PricingNorm::L1 => d.iter().map(|x| x.abs()).sum::<f64>(),
            PricingNorm::L2 => d.iter().map(|x| x * x).sum::<f64>().sqrt(),
            PricingNorm::Linf => d.iter().fold(0.0f64, |a, x| a.max(x.abs())),
        };
        if (pnorm(best.as_slice()) - 1.0).abs() > 1e-12 {
            pr_fail += 1;
        }
        let top = val(best.as_slice());
        for _ in 0..10_000 {
            let d: Vec<f64> = (0..10).map(|_| StandardNormal.sample(&mut grng)).collect();
            let s = pnorm(&d);
            let d: Vec<f64> = d.iter().map(|x| x / s).collect();
            if val(&d) > top + 1e-12 {
                pr_fail += 1;
            }
        }
    }
    let secs = t.elapsed().as_secs_f64();
    report(
        out,
        "10",
        lp_fail == 0 && eig_worst <= 1e-8 && pr_fail == 0,
        false,
        format!(
            "100 LPs: worst duality/slackness residual {lp_worst:.2e} (tol 1e-8), {lp_fail} failures; \
             Lanczos vs dense worst relative error {eig_worst:.2e} (tol 1e-8); \
             pricing: {pr_fail} directions beat the closed form out of 30000; {secs:.1}s"
        ),
    );
}

fn main() {
    if std::env::args().any(|a| a == "--list") {
        return;
    }
    let started = Instant::now();
    let mut out = Vec::new();
    let mut cert = CertStats::default();
    criterion_10(&mut out);
    criterion_1(&mut out, &mut cert);
    criterion_2(&mut out, &mut cert);
    criterion_3(&mut out, &cert);
    criterion_4(&mut out);
    criterion_5(&mut out);
    criterion_9(&mut out);
    criterion_8(&mut out);
    let times = criterion_6(&mut out);
    criterion_7(&mut out, &times);
    out.sort_by_key(|o| o.id.parse::<u32>().unwrap_or(0));
    println!("\nacceptance summary ({:.0}s):", started.elapsed().as_secs_f64());
    for o in &out {
        println!("  {} {:>2}: {}", if o.pass { "PASS" } else if o.reported { "FAIL (reported)" } else { "FAIL" }, o.id, o.detail);
    }
    let hard_fail = out.iter().any(|o| !o.pass && !o.reported);
    if hard_fail {
        std::process::exit(1);
    }
}
