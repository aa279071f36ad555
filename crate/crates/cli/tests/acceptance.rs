//! Acceptance suite: one `[PASS]`/`[FAIL]` line per criterion.
//!
//! Runs without the libtest harness so the lines always reach the test log.

use std::process::{Command, ExitCode};
use std::time::Instant;

use weaksym_core::catalog::{involution_square_residual, minus_identity_residual};
use weaksym_core::hermitian::HermitianStructure;
use weaksym_core::lie::{ad_span_test, Subspace};
use weaksym_core::numerics::{self, Matrix};
use weaksym_core::octonion::{derivation_system, g2_basis, left_mult_operators, spin7_in_so8, su3_in_g2, Octonion};
use weaksym_core::reversal::{
    a_line, normalizer_generators, reverse_family3, reverse_generic, reverse_hermitian, reverse_symmetric,
    ReversalCertificate,
};
use weaksym_core::rng::{stream_rng, Stream};
use weaksym_core::{
    build_hermitian_control, build_pair, isotropy_decomposition, sample_tangent, verify_pair, Family,
    InvolutionDescriptor, Params, SphericalPair, VerifyConfig,
};

struct Outcome {
    pass: bool,
    summary: String,
}

type Criterion = (&'static str, fn() -> Outcome);

fn outcome(pass: bool, summary: impl Into<String>) -> Outcome {
    Outcome { pass, summary: summary.into() }
}

fn params(kv: &[(&str, usize)]) -> Params {
    kv.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

fn pair(id: &str, kv: &[(&str, usize)]) -> SphericalPair {
    build_pair(id, &params(kv)).unwrap_or_else(|e| panic!("{id} {kv:?}: {e}"))
}

fn label(p: &SphericalPair) -> String {
    if p.params.is_empty() {
        p.id.clone()
    } else {
        let ps: Vec<String> = p.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
        format!("{}({})", p.id, ps.join(","))
    }
}

/// The desk-scale parameter set of the catalog-wide check.
fn desk_scale_pairs() -> Vec<SphericalPair> {
    vec![
        pair("I-grassmann", &[("n", 2), ("m", 1)]),
        pair("I-so8-su2sp2", &[]),
        pair("II-su", &[("n", 2), ("m", 1)]),
        pair("II-su", &[("n", 3), ("m", 2)]),
        pair("II-so2n-sun", &[("n", 3)]),
        pair("III-su-sp", &[("n", 1)]),
        pair("III-su-sp", &[("n", 2)]),
        pair("III-su-spu1", &[("n", 1)]),
        pair("III-su-spu1", &[("n", 2)]),
        pair("IV-so8-spin7", &[]),
        pair("IV-so7-g2", &[]),
        pair("IV-g2-a2", &[]),
        pair("V-so10-so2spin7", &[]),
        pair("V-so9-spin7", &[]),
        pair("V-so8-g2", &[]),
        pair("VI-so2n1-un", &[("n", 2)]),
        pair("VI-so2n1-un", &[("n", 3)]),
        pair("VI-spn-spn1u1", &[("n", 1)]),
        pair("VI-spn-spn1u1", &[("n", 2)]),
    ]
}

fn criterion_1() -> Outcome {
    let config = VerifyConfig { samples: 100, tol: 1e-8, seed: 42, ..Default::default() };
    let start = Instant::now();
    let mut short = Vec::new();
    let mut worst: f64 = 0.0;
    let pairs = desk_scale_pairs();
    for p in &pairs {
        let report = verify_pair(p, &config).expect("valid config");
        worst = worst.max(report.aggregate.max_residual);
        if report.aggregate.successes != 100 {
            short.push(format!("{} {}/100", label(p), report.aggregate.successes));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = short.is_empty() && secs <= 600.0;
    outcome(
        pass,
        format!(
            "{} pairs x 100 samples, max residual {worst:.2e}, {secs:.1}s{}",
            pairs.len(),
            if short.is_empty() { String::new() } else { format!(", short: {}", short.join("; ")) }
        ),
    )
}

fn constructive(p: &SphericalPair, structure: Option<&HermitianStructure>, x: &Matrix, config: &VerifyConfig, index: u64) -> Option<ReversalCertificate> {
    let mut rng = stream_rng(config.seed, index, Stream::Restarts);
    match p.family {
        Family::I if p.is_symmetric() => Some(reverse_symmetric(p, x).unwrap()),
        Family::II => Some(reverse_hermitian(p, structure.unwrap(), x, config, &mut rng).unwrap()),
        Family::III => Some(reverse_family3(p, x, config, &mut rng).unwrap()),
        _ => None,
    }
}

fn criterion_2() -> Outcome {
    let config = VerifyConfig { samples: 100, seed: 42, ..Default::default() };
    let mut pass = true;
    let mut worst_direct: f64 = 0.0;
    let mut parts = Vec::new();
    for p in desk_scale_pairs().into_iter().filter(|p| matches!(p.family, Family::I | Family::II | Family::III)) {
        let structure = (p.family == Family::II).then(|| HermitianStructure::new(&p).unwrap());
        let (mut direct, mut fallback, mut both) = (0, 0, 0);
        let mut applicable = true;
        for index in 0..config.samples as u64 {
            let x = sample_tangent(&p, index, config.seed).unwrap();
            let Some(cert) = constructive(&p, structure.as_ref(), &x, &config, index) else {
                applicable = false;
                break;
            };
            let generic = reverse_generic(&p, &x, &config, &mut stream_rng(config.seed ^ 0x5eed, index, Stream::Restarts)).unwrap();
            if cert.fallback_from.is_some() {
                fallback += 1;
            } else {
                direct += 1;
                worst_direct = worst_direct.max(cert.residual);
            }
            if cert.success && generic.success {
                both += 1;
            }
        }
        if !applicable {
            parts.push(format!("{}: no constructive reverser", label(&p)));
            continue;
        }
        pass &= both == config.samples;
        parts.push(format!("{}: both {both}/100, direct {direct}, fallback {fallback}", label(&p)));
    }
    pass &= worst_direct <= 1e-8;
    outcome(pass, format!("max direct constructive residual {worst_direct:.2e}; {}", parts.join("; ")))
}

/// Exhaustive torus search for the negative control. The residual depends on
/// `(a12, a23)` through `|1 + e^{i a}|` with `a13 = a12 + a23`; a grid of
/// step `h` leaves every point within `h/2` per coordinate of a node, which
/// moves each angle by at most `h` and the residual by at most `h`.
fn torus_floor(x: &Matrix) -> (f64, f64) {
    let w = |j: usize, k: usize| x[(j, k)].norm_sqr();
    let total = x.frobenius_norm().powi(2);
    let (w12, w23, w13) = (2.0 * w(0, 1) / total, 2.0 * w(1, 2) / total, 2.0 * w(0, 2) / total);
    let n = 6284usize;
    let h = std::f64::consts::TAU / n as f64;
    let f = |a: f64| 2.0 + 2.0 * a.cos();
    let mut best = f64::INFINITY;
    for i in 0..n {
        let a = i as f64 * h;
        let fa = w12 * f(a);
        for j in 0..n {
            let b = j as f64 * h;
            let r2 = fa + w23 * f(b) + w13 * f(a + b);
            if r2 < best {
                best = r2;
            }
        }
    }
    let min = best.max(0.0).sqrt();
    (min, min - h)
}

fn criterion_3() -> Outcome {
    let p = pair("negative-control-su3-torus", &[]);
    let report = verify_pair(&p, &VerifyConfig { samples: 100, seed: 42, ..Default::default() }).unwrap();
    let mut floors = Vec::new();
    let mut consistent = true;
    let mut certified = false;
    for index in 0..3u64 {
        let x = sample_tangent(&p, index, 42).unwrap();
        let (min, floor) = torus_floor(&x);
        consistent &= report.samples[index as usize].residual >= floor;
        certified |= floor >= 1e-3;
        floors.push(format!("#{index} grid min {min:.4} floor {floor:.4}"));
    }
    let pass = report.aggregate.successes == 0 && certified && consistent;
    outcome(
        pass,
        format!(
            "{}/100 successes, min optimizer residual {:.3e}; {}",
            report.aggregate.successes,
            report.samples.iter().map(|s| s.residual).fold(f64::INFINITY, f64::min),
            floors.join("; ")
        ),
    )
}

fn criterion_4() -> Outcome {
    let config = VerifyConfig { samples: 100, seed: 42, ..Default::default() };
    let mut pass = true;
    let mut parts = Vec::new();
    for n in [1usize, 2] {
        let p = pair("III-su-sp", &[("n", n)]).with_involution(InvolutionDescriptor::Identity);
        let z_k = p.hermitian.as_ref().unwrap().z_k.clone();
        let mut min_gap = f64::INFINITY;
        let mut min_ratio = f64::INFINITY;
        for index in 0..config.samples as u64 {
            let x = sample_tangent(&p, index, config.seed).unwrap();
            let bound = 2.0 * z_k.project(&x).frobenius_norm() / x.frobenius_norm();
            let cert = reverse_generic(&p, &x, &config, &mut stream_rng(config.seed, index, Stream::Restarts)).unwrap();
            min_gap = min_gap.min(cert.residual - (bound - 1e-9));
            min_ratio = min_ratio.min(cert.residual / bound);
        }
        pass &= min_gap >= 0.0;
        parts.push(format!("n={n}: min(residual - bound) {min_gap:.2e}, min residual/bound {min_ratio:.6}"));
    }
    outcome(pass, parts.join("; "))
}

fn criterion_5() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    let rank = numerics::rank(&derivation_system(), 1e-9).unwrap();
    let g2 = g2_basis();
    pass &= 49 - rank == 14 && g2.dim() == 14;
    parts.push(format!("g2 {} (49 - rank {rank})", g2.dim()));

    let l = left_mult_operators();
    let mut products = Vec::new();
    for i in 0..l.len() {
        for j in (i + 1)..l.len() {
            products.push(&l[i] * &l[j]);
        }
    }
    let span = Subspace::from_spanning(8, &products).unwrap();
    let spin7 = spin7_in_so8();
    pass &= span.dim() == 21 && spin7.dim() == 21 && spin7.space().containment_residual(&span) < 1e-10;
    parts.push(format!("spin7 {} (span L_iL_j {})", spin7.dim(), span.dim()));

    let e1 = Octonion::unit(1);
    let v = Matrix::real_column(&e1.0[1..]);
    let images: Vec<Vec<f64>> = g2.basis().iter().map(|d| (d * &v).real_parts()).collect();
    let m = Matrix::from_real_fn(7, images.len(), |i, j| images[j][i]);
    let stab = 14 - numerics::rank(&m, 1e-9).unwrap();
    let su3 = su3_in_g2(&e1).unwrap();
    pass &= stab == 8 && su3.dim() == 8;
    parts.push(format!("su3 {} (14 - rank {})", su3.dim(), 14 - stab));

    let mut bad = Vec::new();
    for p in desk_scale_pairs() {
        let n = p.params.get("n").copied().unwrap_or(0);
        let m = p.params.get("m").copied().unwrap_or(0);
        let table = match p.id.as_str() {
            "I-grassmann" => 2 * n * m,
            "I-so8-su2sp2" => 28 - 3 - 10,
            "II-su" => 2 * n * m + 1,
            "II-so2n-sun" => n * (2 * n - 1) - (n * n - 1),
            "III-su-sp" => (2 * n + 1).pow(2) - 1 - n * (2 * n + 1),
            "III-su-spu1" => (2 * n + 1).pow(2) - 2 - n * (2 * n + 1),
            "IV-so8-spin7" => 28 - 21,
            "IV-so7-g2" => 21 - 14,
            "IV-g2-a2" => 14 - 8,
            "V-so10-so2spin7" => 45 - 1 - 21,
            "V-so9-spin7" => 36 - 21,
            "V-so8-g2" => 28 - 14,
            "VI-so2n1-un" => (2 * n + 1) * n - n * n,
            "VI-spn-spn1u1" => n * (2 * n + 1) - (n - 1) * (2 * n - 1) - 1,
            other => panic!("no table entry for {other}"),
        };
        if p.q.dim() != table || p.g.dim() - p.h.dim() != table {
            bad.push(format!("{} q {} table {table}", label(&p), p.q.dim()));
        }
    }
    pass &= bad.is_empty();
    parts.push(if bad.is_empty() { "q dims match table".to_string() } else { format!("q mismatches: {}", bad.join(", ")) });

    let blocks = isotropy_decomposition(&pair("V-so10-so2spin7", &[])).unwrap();
    pass &= blocks == vec![7, 16];
    parts.push(format!("SO(10) blocks {blocks:?}"));
    outcome(pass, parts.join("; "))
}

fn criterion_6() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    let cases: Vec<(SphericalPair, bool)> = vec![
        (pair("II-su", &[("n", 2), ("m", 1)]), true),
        (pair("II-su", &[("n", 3), ("m", 2)]), true),
        (pair("II-so2n-sun", &[("n", 3)]), true),
        (build_hermitian_control(1, 1).unwrap(), false),
        (build_hermitian_control(2, 2).unwrap(), false),
    ];
    for (p, expected) in cases {
        let s = HermitianStructure::new(&p).unwrap();
        let mut rng = stream_rng(7, 0, Stream::Invariants);
        let spans = ad_span_test(s.k_s.basis(), &s.a, &s.p, s.p.dim().max(1), &mut rng).unwrap();
        let verdict = weaksym_core::hermitian::tube_type_check(&p);
        let ok = s.is_nontube() == expected && spans == expected && matches!(verdict, Ok(v) if v == expected);
        pass &= ok;
        parts.push(format!("{} Z'={} span={}", label(&p), if s.is_nontube() { "nonzero" } else { "zero" }, spans));
    }
    outcome(pass, parts.join("; "))
}

fn subspace_distance(a: &Subspace, b: &Subspace) -> f64 {
    if a.dim() != b.dim() {
        return f64::INFINITY;
    }
    a.containment_residual(b).max(b.containment_residual(a))
}

fn criterion_7() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for n in [2usize, 3] {
        let gens = normalizer_generators(n).unwrap();
        for (j, l) in gens.l.iter().enumerate() {
            let moved = a_line(n, j).unwrap().map(|x| l.act(x)).unwrap();
            worst = worst.max(subspace_distance(&moved, &a_line(n, j + 1).unwrap()));
            count += 1;
        }
        for (j, lt) in gens.l_tilde.iter().enumerate() {
            let moved = a_line(n, j).unwrap().map(|x| lt.act(x)).unwrap();
            worst = worst.max(subspace_distance(&moved, &a_line(n, n + j).unwrap()));
            count += 1;
        }
    }
    outcome(worst < 1e-10, format!("{count} identities for n = 2, 3, max residual {worst:.2e}"))
}

fn criterion_8() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for p in desk_scale_pairs().into_iter().filter(|p| matches!(p.family, Family::II | Family::III)) {
        let herm = p.hermitian.as_ref().unwrap();
        let ks = herm.k_s.basis().iter().map(|x| herm.k_s.space().relative_residual(&p.theta(x))).fold(0.0, f64::max);
        let values = [
            involution_square_residual(&p),
            minus_identity_residual(&p, &herm.a),
            minus_identity_residual(&p, &herm.z_k),
            ks,
        ];
        let m = values.iter().copied().fold(0.0, f64::max);
        worst = worst.max(m);
        parts.push(format!("{} {m:.1e}", label(&p)));
    }
    outcome(worst < 1e-12, format!("max residual {worst:.2e} over {}", parts.join(", ")))
}

fn run_cli(threads: &str, report: &std::path::Path) -> (i32, Vec<u8>, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_weaksym"))
        .args(["verify", "III-su-sp", "--n", "2", "--samples", "30", "--seed", "42", "--report"])
        .arg(report)
        .env("RAYON_NUM_THREADS", threads)
        .output()
        .expect("binary runs");
    let stdout_run = Command::new(env!("CARGO_BIN_EXE_weaksym"))
        .args(["verify", "IV-g2-a2", "--samples", "30", "--seed", "42", "--format", "csv"])
        .env("RAYON_NUM_THREADS", threads)
        .output()
        .expect("binary runs");
    (out.status.code().unwrap_or(-1), std::fs::read(report).unwrap_or_default(), stdout_run.stdout)
}

fn criterion_9() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let a = run_cli("1", &dir.path().join("a.json"));
    let b = run_cli("4", &dir.path().join("b.json"));
    let c = run_cli("4", &dir.path().join("c.json"));
    let pass = a.0 == 0 && !a.1.is_empty() && a.1 == b.1 && b.1 == c.1 && a.2 == b.2 && b.2 == c.2 && !a.2.is_empty();
    outcome(
        pass,
        format!("JSON report {} bytes and CSV {} bytes identical across 1/4/4 threads: {}", a.1.len(), a.2.len(), pass),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("catalog-wide verification", criterion_1),
        ("constructive/optimizer agreement", criterion_2),
        ("negative control", criterion_3),
        ("centre obstruction", criterion_4),
        ("structure dimensions", criterion_5),
        ("hermitian structure", criterion_6),
        ("normalizer identities", criterion_7),
        ("involution certification", criterion_8),
        ("determinism", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = f();
        if !o.pass {
            failed += 1;
        }
        println!(
            "[{}] criterion {}: {name}: {} ({:.1}s)",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            o.summary,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} of 9 criteria pass", 9 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
