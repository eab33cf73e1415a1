//! Acceptance checks. Each check prints one PASS/FAIL line; the process
//! fails if any check fails. Informational lines start with `info`.

use std::fs;
use std::process::Command;

use corner_sinr::analytic::{
    interference_factors, interference_factors_inf, success_probability, success_probability_inf,
    success_probability_oracle,
};
use corner_sinr::design::{apply_design, optimal_tx_prob, optimal_tx_prob_inf};
use corner_sinr::montecarlo::{
    conditional_success_exact, conditional_success_fading, fading_rng, fine_grained_sweep, meta_distribution,
    realization_rng, sample_realization, MetaConfig, SweepGeometry,
};
use corner_sinr::specfun::{g_func, g_func_quadrature, h_func, h_func_quadrature, QuadratureSpec};
use corner_sinr::{ChannelParams, Link, Position, Scenario};

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn log_grid(lo: f64, hi: f64, per_decade: usize) -> Vec<f64> {
    let decades = (hi / lo).log10();
    let n = (decades * per_decade as f64).round() as usize;
    (0..=n).map(|i| lo * 10f64.powf(decades * i as f64 / n as f64)).collect()
}

fn design_link() -> Link {
    Link::at_separation(50.0, 100.0).unwrap()
}

fn environments() -> [(&'static str, Scenario); 2] {
    [("suburban", Scenario::reference_suburban()), ("urban", Scenario::reference_urban())]
}

fn special_functions() -> Verdict {
    let spec = QuadratureSpec::default();
    let thetas = log_grid(1e-3, 1e4, 4);
    let mut deltas = vec![0.0];
    deltas.extend(log_grid(1e-3, 1e3, 4));

    let mut g_err = 0.0f64;
    for &t in &thetas {
        let want = t.atan();
        g_err = g_err
            .max((g_func(2.0, t).unwrap() - want).abs())
            .max((g_func_quadrature(2.0, t, &spec).unwrap() - want).abs());
    }
    let mut h_err = 0.0f64;
    for &d in &deltas {
        for &t in &thetas {
            let want = 2.0 / (1.0 + d).sqrt() * (t / (1.0 + d)).sqrt().atan();
            h_err = h_err
                .max((h_func(2.0, d, t).unwrap() - want).abs())
                .max((h_func_quadrature(2.0, d, t, &spec).unwrap() - want).abs());
        }
    }
    let mut id_err = 0.0f64;
    for alpha in [1.68, 2.0, 4.0] {
        for &t in &thetas {
            let lhs = h_func_quadrature(alpha, 0.0, t, &spec).unwrap();
            let rhs = 2.0 * g_func_quadrature(alpha, t.sqrt(), &spec).unwrap();
            id_err = id_err.max((lhs - rhs).abs());
        }
    }
    verdict(
        g_err < 1e-10 && h_err < 1e-10 && id_err < 1e-9,
        format!("max |g-atan| {g_err:.2e}, max |h-closed| {h_err:.2e} (tol 1e-10); identity {id_err:.2e} (tol 1e-9)"),
    )
}

fn closed_form_vs_oracle() -> Verdict {
    let channels = [
        ("suburban a=2", ChannelParams::suburban(2.0)),
        ("suburban a=4", ChannelParams::suburban(4.0)),
        ("urban a=1.68", ChannelParams::reference_urban()),
    ];
    let mut worst = (0.0f64, String::new());
    let mut cases = 0;
    for (name, ch) in channels {
        for rx in [25.0, 50.0, 250.0] {
            let rx_pos = Position::OnHorizontal(-rx);
            let mut geometries = vec![
                ("LOS", Position::OnHorizontal(-rx + 20.0)),
                ("WLOS", Position::OnVertical(10.0)),
            ];
            if ch.is_urban() {
                geometries.push(("NLOS", Position::OnVertical(50.0)));
            }
            for (geo, tx) in geometries {
                let link = Link::new(tx, rx_pos).unwrap();
                for p_i in [0.02, 1.0] {
                    let s = Scenario {
                        channel: ch,
                        ..Scenario::reference_suburban()
                    }
                    .with_tx_prob(p_i);
                    let a = success_probability(&s, &link).unwrap().p_c;
                    let o = success_probability_oracle(&s, &link).unwrap().p_c;
                    let rel = ((a - o) / o).abs();
                    cases += 1;
                    if rel >= worst.0 {
                        worst = (rel, format!("{name}, rx {rx} m, {geo}, p_I {p_i}"));
                    }
                }
            }
        }
    }
    verdict(
        worst.0 < 1e-6,
        format!("{cases} cases, worst relative error {:.2e} at {} (tol 1e-6)", worst.0, worst.1),
    )
}

fn infinite_road_limits() -> Verdict {
    let mut lines = Vec::new();
    let mut pass = true;
    for (name, s) in environments() {
        let s = s.with_half_len(10_000.0);
        let f = interference_factors(&s, &design_link()).unwrap();
        let inf = interference_factors_inf(&s, &design_link()).unwrap();
        let ex = ((f.x - inf.x) / inf.x).abs();
        let ey = ((f.y - inf.y) / inf.y).abs();
        pass &= ex <= 1e-2 && ey <= 1e-2;
        lines.push(format!(
            "{name}: X {:.5}/{:.5} rel {ex:.2e}, Y {:.5}/{:.5} rel {ey:.2e}",
            f.x, inf.x, f.y, inf.y
        ));
    }
    verdict(pass, format!("{} (tol 1e-2)", lines.join("; ")))
}

/// Designed outage curves at 10 km against infinite roads, each with its own
/// transmit probability.
fn infinite_road_curves_info() -> String {
    let mut parts = Vec::new();
    for (name, s) in environments() {
        let s = s.with_half_len(10_000.0);
        let (finite, _) = apply_design(&s, 0.9, &design_link()).unwrap();
        let p_inf = optimal_tx_prob_inf(&s, 0.9, &design_link()).unwrap();
        let infinite = s.with_tx_prob(p_inf);
        let mut worst = 0.0f64;
        for k in 1..=140 {
            let l = Link::at_separation(50.0, k as f64).unwrap();
            let a = success_probability(&finite, &l).unwrap().outage();
            let b = success_probability_inf(&infinite, &l).unwrap().outage();
            worst = worst.max((a - b).abs());
        }
        parts.push(format!("{name} max |outage diff| {worst:.2e}"));
    }
    format!("designed outage curves, 10 km vs infinite roads: {}", parts.join(", "))
}

fn design_round_trip() -> Verdict {
    let mut pass = true;
    let mut worst_rt = 0.0f64;
    let mut notes = Vec::new();
    for (name, s) in environments() {
        for r in [200.0, 500.0, 10_000.0] {
            let d = optimal_tx_prob(&s, 0.9, &design_link(), r, r).unwrap();
            let back = success_probability(&s.with_half_len(r).with_tx_prob(d.p_star_raw), &design_link())
                .unwrap()
                .p_c;
            worst_rt = worst_rt.max((back - 0.9).abs());
        }
        let grid = log_grid(20.0, 1e8, 20);
        let curve: Vec<f64> = grid
            .iter()
            .map(|&r| optimal_tx_prob(&s, 0.9, &design_link(), r, r).unwrap().p_star_raw)
            .collect();
        let p_inf = optimal_tx_prob_inf(&s, 0.9, &design_link()).unwrap();
        let monotone = curve.windows(2).all(|w| w[1] <= w[0]);
        let above = curve.iter().all(|&p| p >= p_inf);
        let gap = (curve[curve.len() - 1] - p_inf) / p_inf;
        pass &= monotone && above && gap < 1e-2;
        notes.push(format!(
            "{name}: monotone {monotone}, above p_inf {above}, gap at 1e8 m {gap:.1e}"
        ));
    }
    pass &= worst_rt < 1e-9;
    verdict(
        pass,
        format!("round trip max |P_c-0.9| {worst_rt:.1e} (tol 1e-9); {}", notes.join("; ")),
    )
}

fn fig5_scenarios() -> Vec<(String, Scenario)> {
    let mut out = Vec::new();
    for (name, s) in environments() {
        for r in [200.0, 10_000.0] {
            let s = s.with_half_len(r);
            out.push((format!("{name} R={r} no design"), s));
            let (designed, _) = apply_design(&s, 0.9, &design_link()).unwrap();
            out.push((format!("{name} R={r} design"), designed));
        }
    }
    out
}

fn mc(n_ppp: usize, seed: u64) -> MetaConfig {
    MetaConfig {
        n_ppp,
        master_seed: seed,
        ..MetaConfig::default()
    }
}

fn mc_vs_analytic() -> Verdict {
    let mut pass = true;
    let mut worst = 0.0f64;
    for (_, s) in fig5_scenarios() {
        let m = meta_distribution(&s, &design_link(), &mc(2000, 2024)).unwrap();
        let p = success_probability(&s, &design_link()).unwrap().p_c;
        let z = (m.moment1 - p).abs() / m.std_error();
        worst = worst.max(z);
        pass &= z <= 3.0;
    }
    verdict(pass, format!("8 scenarios, worst |moment1-P_c| {worst:.2} standard errors (tol 3)"))
}

fn fig5_statistics() -> Verdict {
    let mut pass = true;
    let mut notes = Vec::new();
    let mut check = |label: &str, value: f64, lo: f64, hi: f64| {
        let ok = value >= lo && value <= hi;
        pass &= ok;
        notes.push(format!("{label} {value:.3} in [{lo:.2},{hi:.2}]"));
    };
    let urban = Scenario::reference_urban().with_half_len(10_000.0);
    let m = meta_distribution(&urban, &design_link(), &mc(2000, 7)).unwrap();
    check("urban 10km outage", m.mean_outage(), 0.52, 0.60);
    check("F_r(mean)", m.cdf_at(m.moment1), 0.45, 0.57);
    let sub = Scenario::reference_suburban();
    let m = meta_distribution(&sub, &design_link(), &mc(2000, 7)).unwrap();
    check("suburban 200m outage", m.mean_outage(), 0.08, 0.14);
    check("F_r(mean)", m.cdf_at(m.moment1), 0.79, 0.91);
    for (name, s) in fig5_scenarios().into_iter().filter(|(n, _)| !n.contains("no design")) {
        let m = meta_distribution(&s, &design_link(), &mc(2000, 7)).unwrap();
        check(&format!("{name} outage"), m.mean_outage(), 0.08, 0.12);
        check("F_r(0.9)", m.cdf_at(0.9), 0.75, 0.95);
    }
    verdict(pass, notes.join(", "))
}

fn bimodality() -> Verdict {
    let mut pass = true;
    let mut notes = Vec::new();
    for (name, s) in environments() {
        for (r, expect) in [(200.0, true), (10_000.0, false)] {
            let (designed, _) = apply_design(&s.with_half_len(r), 0.9, &design_link()).unwrap();
            let geom = SweepGeometry {
                rx_dist: 50.0,
                d_max: 140.0,
                m_e: 35,
                d_target: 100.0,
                target: 0.9,
            };
            let fg = fine_grained_sweep(&designed, &geom, &mc(1000, 99)).unwrap();
            let mut agree = 0;
            let mut total = 0;
            for (d, est) in fg.separations.iter().zip(&fg.estimates) {
                if *d >= 100.0 {
                    total += 1;
                    if est.bimodality(0.9).holds() == expect {
                        agree += 1;
                    }
                }
            }
            pass &= agree == total;
            let word = if expect { "bimodal" } else { "unimodal" };
            let b = fg.estimates[fg.group_position].bimodality(0.9);
            notes.push(format!(
                "{name} R={r}: expected {word}, matched at {agree}/{total} positions (at 100 m low {:.2} + high {:.2} vs near {:.2})",
                b.low, b.high, b.near_mean
            ));
        }
    }
    verdict(pass, notes.join(", "))
}

fn urban_jump() -> Verdict {
    let s = apply_design(&Scenario::reference_urban(), 0.9, &design_link()).unwrap().0;
    let outage: Vec<f64> = (1..=140)
        .map(|k| success_probability(&s, &Link::at_separation(50.0, k as f64).unwrap()).unwrap().outage())
        .collect();
    let steps: Vec<f64> = outage.windows(2).map(|w| w[1] - w[0]).collect();
    let (i, &big) = steps
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .unwrap();
    let (from, to) = (i + 1, i + 2);
    let mut others: Vec<f64> = steps.clone();
    others.remove(i);
    let next = others.iter().cloned().fold(0.0, f64::max);
    let is_jump = big > 5.0 * next;
    verdict(
        from >= 64 && to <= 66 && is_jump,
        format!("largest step {big:.4} between {from} m and {to} m (next largest {next:.4})"),
    )
}

fn fading_fidelity() -> (Verdict, String) {
    let n_f = 1000;
    let count = |s: &Scenario, seed: u64| {
        let mut bad = 0;
        let mut worst = 0.0f64;
        for i in 0..200u64 {
            let real = sample_realization(&s.roads, &mut realization_rng(seed, i));
            let exact = conditional_success_exact(&real, s, &design_link()).unwrap();
            let est = conditional_success_fading(&real, s, &design_link(), n_f, &mut fading_rng(seed, i, 0)).unwrap();
            let se = (exact * (1.0 - exact) / n_f as f64).sqrt();
            let z = if se > 0.0 { (est - exact).abs() / se } else if est == exact { 0.0 } else { f64::INFINITY };
            worst = worst.max(z);
            if z > 4.0 {
                bad += 1;
            }
        }
        (bad, worst)
    };
    let s = Scenario::reference_urban().with_half_len(10_000.0);
    let (bad, worst) = count(&s, 5);
    let v = verdict(
        bad == 0,
        format!("urban 10 km: {bad}/200 realizations beyond 4 SE, worst {worst:.2} SE"),
    );
    let short = apply_design(&Scenario::reference_urban(), 0.9, &design_link()).unwrap().0;
    let (bad, worst) = count(&short, 5);
    let info = format!(
        "fading vs exact, designed urban 200 m (p_c near 1, p(1-p)n_f << 1): {bad}/200 beyond 4 SE, worst {worst:.1} SE"
    );
    (v, info)
}

fn determinism() -> Verdict {
    let bin = env!("CARGO_BIN_EXE_corner-sinr");
    let config = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/urban.toml");
    let tmp = tempfile::tempdir().unwrap();
    let mut outs = Vec::new();
    for threads in ["1", "8"] {
        let out = tmp.path().join(format!("t{threads}"));
        let status = Command::new(bin)
            .args(["meta", "--config", config, "--seed", "17", "--half-len", "10000", "--out"])
            .arg(&out)
            .env("CORNER_SINR_THREADS", threads)
            .status()
            .unwrap();
        assert!(status.success());
        outs.push(out);
    }
    let mut identical = true;
    let names = ["meta_histogram.csv", "meta_samples.csv", "meta_summary.csv"];
    for n in names {
        identical &= fs::read(outs[0].join(n)).unwrap() == fs::read(outs[1].join(n)).unwrap();
    }
    verdict(identical, format!("{} CSVs compared across 1 and 8 threads", names.len()))
}

fn main() {
    let mut failed = 0;
    let mut report = |n: usize, name: &str, v: Verdict| {
        let tag = if v.pass { "PASS" } else { "FAIL" };
        println!("{n:>2}. {tag}  {name}: {}", v.detail);
        if !v.pass {
            failed += 1;
        }
    };
    report(1, "special-function exactness", special_functions());
    report(2, "closed form vs direct quadrature", closed_form_vs_oracle());
    report(3, "infinite-road limits at 10 km", infinite_road_limits());
    println!("    info  {}", infinite_road_curves_info());
    report(4, "design round trip", design_round_trip());
    report(5, "Monte Carlo vs analytic", mc_vs_analytic());
    report(6, "meta distribution statistics", fig5_statistics());
    report(7, "fine-grained bimodality", bimodality());
    report(8, "urban discontinuity location", urban_jump());
    let (v, info) = fading_fidelity();
    report(9, "fading-mode fidelity", v);
    println!("    info  {info}");
    report(10, "determinism across thread counts", determinism());
    if failed > 0 {
        println!("{failed} acceptance check(s) failed");
        std::process::exit(1);
    }
    println!("all acceptance checks passed");
}
