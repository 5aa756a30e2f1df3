//! End-to-end acceptance checks. Each check prints one PASS/FAIL line; the
//! test fails at the end if any check did.

use std::sync::Arc;
use std::time::Instant;

use grkex_core::analysis::{
    exp_ddh_product, exp_triples, exp_uniformity, stream_rng, BaseMode, ExperimentConfig,
    ExperimentRanges, Reference, DEFAULT_QQ_THRESHOLD,
};
use grkex_core::challenge::{format_matrix, ChallengeSet, ChallengeWarning};
use grkex_core::kex::{key_encode, sample_base, KexParams, KexSession};
use grkex_core::orbit::{
    brute_dlog, bsgs_solve, orbit_by_table, orbit_detect, DEFAULT_BSGS_ENTRIES,
};
use grkex_core::stats::{binom_support_prob, DEFAULT_ALPHA};
use grkex_core::structured::{
    random_invertible, zero_divisor_s, zero_divisor_witness, INVERTIBLE_FACTORS,
};
use grkex_core::{BaseKind, Exponent, GroupRingElement, MatrixGR, Permutation, RingContext};
use rand::Rng;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn el(ctx: &Arc<RingContext>, text: &str) -> GroupRingElement {
    GroupRingElement::parse(text, ctx).unwrap()
}

fn exact_vectors() -> Outcome {
    let ctx = RingContext::new(7, 5).unwrap();
    let a = el(&ctx, "5(123)+2(15)(24)+(153)");
    let b = el(&ctx, "3(123)+4(1453)");
    let ab = el(
        &ctx,
        "(132)+6(145)(23)+6(14235)+(124)(35)+3(12)(35)+4(1435)",
    );
    let ba = el(
        &ctx,
        "(132)+6(15243)+3(15)(23)+6(12)(345)+(13)(254)+4(1345)",
    );
    let mut ok = &a + &b == el(&ctx, "(123)+2(15)(24)+(153)+4(1453)");
    ok &= &a * &b == ab;
    ok &= &b * &a == ba;

    let e = GroupRingElement::one(&ctx);
    let z = GroupRingElement::zero(&ctx);
    let m1 =
        MatrixGR::from_entries(&ctx, 2, &[a.clone(), e.clone(), e.clone(), b.clone()]).unwrap();
    let m2 = MatrixGR::from_entries(&ctx, 2, &[b.clone(), e.clone(), z, a.clone()]).unwrap();
    let product = &m1 * &m2;
    ok &= product.entry(0, 0) == ab;
    ok &= product.entry(0, 1) == el(&ctx, "3(123)+4(15)(24)+2(153)");
    ok &= product.entry(1, 0) == b;
    ok &= product.entry(1, 1) == &e + &ba;
    outcome(
        ok,
        "a+b, ab, ba and the 2x2 product match the printed values",
    )
}

fn protocol_agreement() -> Outcome {
    let mut agreed = 0;
    let mut total = 0;
    for k in [2, 3] {
        let params = KexParams::new(7, 5, k);
        for s in 0..100u64 {
            let seed = 500 + s;
            let base = sample_base(&params, BaseKind::Random, &mut stream_rng(seed, 0)).unwrap();
            let mut alice =
                KexSession::new(params.clone(), base.clone(), &mut stream_rng(seed, 1)).unwrap();
            let mut bob = KexSession::new(params.clone(), base, &mut stream_rng(seed, 2)).unwrap();
            let (pa, pb) = (alice.public().clone(), bob.public().clone());
            let ka = key_encode(alice.complete(&pb).unwrap());
            let kb = key_encode(bob.complete(&pa).unwrap());
            total += 1;
            agreed += usize::from(ka == kb);
        }
    }
    outcome(
        agreed == total,
        format!("{agreed}/{total} sessions with identical shared keys"),
    )
}

fn key_sizes() -> Outcome {
    let ctx = RingContext::new(7, 5).unwrap();
    let bits2 = MatrixGR::encoded_bits(&ctx, 2);
    let bits3 = MatrixGR::encoded_bits(&ctx, 3);
    let bytes2 = MatrixGR::random(&ctx, 2, &mut stream_rng(1, 0))
        .encode()
        .len();
    let bytes3 = MatrixGR::random(&ctx, 3, &mut stream_rng(1, 0))
        .encode()
        .len();
    outcome(
        bits2 == 1440 && bits3 == 3240 && bytes2 * 8 == 1440 && bytes3 * 8 == 3240,
        format!("2x2 {bits2} bits, 3x3 {bits3} bits"),
    )
}

fn support_claim() -> Outcome {
    let exact = binom_support_prob(5, 2, 50, 70).unwrap();
    let ctx = RingContext::new(2, 5).unwrap();
    let samples = 100_000u64;
    let mut rng = stream_rng(4, 0);
    let inside = (0..samples)
        .filter(|_| (50..=70).contains(&GroupRingElement::random(&ctx, &mut rng).support_size()))
        .count();
    let sampled = inside as f64 / samples as f64;
    let in_band = (0.92..=0.94).contains(&exact);
    let agrees = (sampled - exact).abs() <= 0.01;
    outcome(
        in_band && agrees,
        format!(
            "exact {exact:.6} ({}in [0.92, 0.94]), sampled {sampled:.4} ({}within 0.01 of exact)",
            if in_band { "" } else { "not " },
            if agrees { "" } else { "not " }
        ),
    )
}

fn ddh_experiments() -> Outcome {
    const RUNS: u64 = 100;
    const NEEDED: u64 = 95;
    let mut lines = Vec::new();
    let mut ok = true;

    for (name, which) in [("exp1", 1), ("exp2", 2)] {
        let mut passes = 0;
        let mut worst_qq: f64 = 0.0;
        for r in 0..RUNS {
            let cfg = ExperimentConfig::new(500, 10_000 + r);
            let tables = if which == 1 {
                exp_ddh_product(&cfg)
            } else {
                exp_uniformity(&cfg, Reference::Random)
            }
            .unwrap();
            let v = tables.verdict(DEFAULT_ALPHA, DEFAULT_QQ_THRESHOLD).unwrap();
            passes += u64::from(v.first.passes(DEFAULT_ALPHA) && v.second.passes(DEFAULT_ALPHA));
            worst_qq = worst_qq.max(v.qq_deviation);
        }
        ok &= passes >= NEEDED && worst_qq < DEFAULT_QQ_THRESHOLD;
        lines.push(format!(
            "{name} {passes}/{RUNS} chi-square, max Q-Q {worst_qq:.2}"
        ));
    }

    let mut passes = 0;
    let mut mean = 0.0;
    for r in 0..RUNS {
        let cfg = ExperimentConfig::new(30_000, 20_000 + r).with_ranges(ExperimentRanges::fast());
        let table = exp_triples(&cfg, BaseMode::Shared, 0).unwrap();
        passes += u64::from(table.chi_square().unwrap().passes(DEFAULT_ALPHA));
        mean = table.mean_count();
    }
    ok &= passes >= NEEDED;
    lines.push(format!(
        "exp3 {passes}/{RUNS} chi-square, {mean:.1} per triple"
    ));
    outcome(ok, lines.join("; "))
}

fn mean_pow_seconds(k: usize, digits: u32, reps: u64) -> f64 {
    let ctx = RingContext::new(7, 5).unwrap();
    let lo = Exponent::pow10(digits - 1);
    let hi = Exponent::pow10(digits);
    let mut total = 0.0;
    for r in 0..reps {
        let mut rng = stream_rng(6, r);
        let m = MatrixGR::random(&ctx, k, &mut rng);
        let e = Exponent::sample_range(&lo, &hi, &mut rng).unwrap();
        let start = Instant::now();
        std::hint::black_box(m.pow(&e));
        total += start.elapsed().as_secs_f64();
    }
    total / reps as f64
}

fn performance() -> Outcome {
    let small = mean_pow_seconds(2, 100, 25);
    let large = mean_pow_seconds(3, 1000, 5);
    outcome(
        small <= 0.6 && large <= 20.0,
        format!(
            "2x2 100-digit {:.2} ms, 3x3 1000-digit {:.1} ms",
            small * 1e3,
            large * 1e3
        ),
    )
}

fn algebraic_properties() -> Outcome {
    let mut failures = Vec::new();
    let mut rng = stream_rng(7, 0);
    let ctx = RingContext::new(7, 5).unwrap();
    let untabled = RingContext::without_table(7, 5).unwrap();

    let mut ring_ok = true;
    let mut sign_ok = true;
    let mut table_ok = true;
    for _ in 0..200 {
        let x = GroupRingElement::random(&ctx, &mut rng);
        let y = GroupRingElement::random(&ctx, &mut rng);
        let z = GroupRingElement::random(&ctx, &mut rng);
        ring_ok &= &(&x * &y) * &z == &x * &(&y * &z);
        ring_ok &= &(&x + &y) + &z == &x + &(&y + &z);
        ring_ok &= &x + &y == &y + &x;
        ring_ok &= &x * &(&y + &z) == &(&x * &y) + &(&x * &z);
        ring_ok &= &(&y + &z) * &x == &(&y * &x) + &(&z * &x);
        sign_ok &= (&x * &y).sign_image() == x.sign_image().mul(y.sign_image(), 7);
        let xu = GroupRingElement::from_coeffs(&untabled, x.coeffs().to_vec()).unwrap();
        let yu = GroupRingElement::from_coeffs(&untabled, y.coeffs().to_vec()).unwrap();
        table_ok &= (&xu * &yu).coeffs() == (&x * &y).coeffs();
    }
    if !ring_ok {
        failures.push("ring axioms");
    }
    if !sign_ok {
        failures.push("sign homomorphism");
    }
    if !table_ok {
        failures.push("table vs direct");
    }

    let a = el(&ctx, "5(123)+2(15)(24)+(153)");
    let b = el(&ctx, "3(123)+4(1453)");
    if &a * &b == &b * &a {
        failures.push("noncommutativity witness");
    }

    let mut power_ok = true;
    for _ in 0..10 {
        let m = MatrixGR::random(&ctx, 2, &mut rng);
        let e1: u64 = rng.gen_range(0..=1_000_000);
        let e2: u64 = rng.gen_range(0..=1_000_000);
        power_ok &= m.pow_u64(e1 + e2) == &m.pow_u64(e1) * &m.pow_u64(e2);
        power_ok &=
            m.pow_u64(e1).pow_u64(e2) == m.pow(&(&Exponent::from(e1) * &Exponent::from(e2)));
        power_ok &= &m.pow_u64(e1) * &m.pow_u64(e2) == &m.pow_u64(e2) * &m.pow_u64(e1);
    }
    if !power_ok {
        failures.push("power laws");
    }

    let mut rank_ok = true;
    for m in 1..=6 {
        let count = (1..=m).product::<usize>();
        let mut seen = std::collections::HashSet::new();
        for r in 0..count {
            let p = Permutation::unrank(m, r).unwrap();
            rank_ok &= p.rank() == r;
            seen.insert(p.images());
        }
        rank_ok &= seen.len() == count;
    }
    if !rank_ok {
        failures.push("rank/unrank");
    }

    outcome(
        failures.is_empty(),
        if failures.is_empty() {
            "ring axioms, noncommutativity, power laws, signs, rank bijection, table differential"
                .into()
        } else {
            format!("failed: {}", failures.join(", "))
        },
    )
}

fn zero_divisor() -> Outcome {
    let ctx = RingContext::new(7, 5).unwrap();
    let s = zero_divisor_s(&ctx).unwrap();
    let t = zero_divisor_witness(&ctx).unwrap();
    let product = &s * &t;
    outcome(
        product.is_zero() && !s.is_zero() && !t.is_zero(),
        format!(
            "s*t has support {}, s support {}, t support {}",
            product.support_size(),
            s.support_size(),
            t.support_size()
        ),
    )
}

/// Every matrix over the given ring with the given dimension.
fn all_matrices(ctx: &Arc<RingContext>, k: usize) -> Vec<MatrixGR> {
    let cells = k * k * ctx.order();
    let n = ctx.modulus() as usize;
    let total = n.pow(cells as u32);
    (0..total)
        .map(|mut code| {
            let mut coeffs = vec![0u16; cells];
            for c in coeffs.iter_mut() {
                *c = (code % n) as u16;
                code /= n;
            }
            let entries: Vec<_> = coeffs
                .chunks(ctx.order())
                .map(|c| GroupRingElement::from_coeffs(ctx, c.to_vec()).unwrap())
                .collect();
            MatrixGR::from_entries(ctx, k, &entries).unwrap()
        })
        .collect()
}

fn oracle_equivalence() -> Outcome {
    let mut rng = stream_rng(9, 0);
    let toy = RingContext::new(2, 3).unwrap();
    let mut bsgs_agree = 0;
    for i in 0..500 {
        let k = if i % 2 == 0 { 1 } else { 2 };
        let m = MatrixGR::random(&toy, k, &mut rng);
        let bound: u64 = rng.gen_range(1..=2000);
        let planted = rng.gen_range(0..=bound);
        let a = m.pow_u64(planted);
        let fast = bsgs_solve(&m, &a, bound, DEFAULT_BSGS_ENTRIES)
            .unwrap()
            .exponent;
        let slow = brute_dlog(&m, &a, bound);
        bsgs_agree += usize::from(fast.is_some() && fast == slow);
    }

    let mut orbit_cases = 0;
    let mut orbit_agree = 0;
    for (n, m, k) in [(2, 3, 1), (3, 3, 1), (2, 2, 2)] {
        let ctx = RingContext::new(n, m).unwrap();
        for x in all_matrices(&ctx, k) {
            orbit_cases += 1;
            let floyd = orbit_detect(&x, 1_000_000).orbit;
            orbit_agree += usize::from(floyd.is_some() && floyd == orbit_by_table(&x, 1_000_000));
        }
    }

    let mut pow_ok = true;
    for (n, m, k) in [(7, 5, 2), (2, 3, 1), (3, 4, 3)] {
        let ctx = RingContext::new(n, m).unwrap();
        let base = MatrixGR::random(&ctx, k, &mut rng);
        let mut iterated = MatrixGR::identity(&ctx, k);
        for e in 0..=1000u64 {
            pow_ok &= base.pow_u64(e) == iterated;
            iterated = &iterated * &base;
        }
    }

    outcome(
        bsgs_agree == 500 && orbit_agree == orbit_cases && pow_ok,
        format!(
            "bsgs {bsgs_agree}/500, orbits {orbit_agree}/{orbit_cases}, powers up to 1000 {}",
            if pow_ok { "match" } else { "differ" }
        ),
    )
}

fn invertible_sampler() -> Outcome {
    let ctx = RingContext::new(7, 5).unwrap();
    let mut good = 0;
    for k in [2, 3] {
        let i = MatrixGR::identity(&ctx, k);
        for s in 0..100 {
            let (m, inv) =
                random_invertible(&ctx, k, INVERTIBLE_FACTORS, &mut stream_rng(11, s)).unwrap();
            good += usize::from(&m * &inv == i && &inv * &m == i);
        }
    }
    outcome(
        good == 200,
        format!("{good}/200 pairs are two-sided inverses"),
    )
}

fn normalized_terms(line: &str) -> Vec<String> {
    let body = line.split_once('=').unwrap().1;
    let mut terms: Vec<String> = body
        .split('+')
        .map(|t| t.split_whitespace().collect::<Vec<_>>().join(" "))
        .map(|t| {
            if t == "e" || t == "\\epsilon" {
                "ε".into()
            } else {
                t
            }
        })
        .collect();
    terms.sort();
    terms
}

fn challenge_corpus() -> Outcome {
    let set = ChallengeSet::published().unwrap();
    let raw = [
        include_str!("../data/challenge/M.txt"),
        include_str!("../data/challenge/Ma.txt"),
        include_str!("../data/challenge/Mb.txt"),
    ];
    let texts = set.format().unwrap();
    let again = ChallengeSet::parse(&texts[0], &texts[1], &texts[2]).unwrap();
    let mut ok = again == set && again.format().unwrap() == texts;

    // The canonical text lists the same terms as the published one.
    for (published, canonical) in raw.iter().zip(&texts) {
        let mut a: Vec<_> = published
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(normalized_terms)
            .collect();
        let mut b: Vec<_> = canonical.lines().map(normalized_terms).collect();
        a.sort();
        b.sort();
        ok &= a == b;
    }
    for m in [&set.m, &set.ma, &set.mb] {
        ok &= m.coeffs().iter().all(|&c| c <= 1);
        ok &= format_matrix(m).is_ok();
    }
    let warned = set.warnings == vec![ChallengeWarning::Duplicate("Ma", "Mb")];
    outcome(
        ok && warned,
        format!(
            "3 matrices parsed, canonical round trip {}, warnings: {}",
            if ok { "exact" } else { "broken" },
            set.warnings
                .iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join("; ")
        ),
    )
}

type Check = fn() -> Outcome;

#[test]
fn acceptance() {
    let checks: [(&str, Check); 11] = [
        ("exact vectors", exact_vectors),
        ("protocol agreement", protocol_agreement),
        ("key sizes", key_sizes),
        ("support-size claim", support_claim),
        ("distribution experiments", ddh_experiments),
        ("performance", performance),
        ("algebraic properties", algebraic_properties),
        ("zero divisor", zero_divisor),
        ("oracle equivalence", oracle_equivalence),
        ("invertible sampler", invertible_sampler),
        ("challenge corpus", challenge_corpus),
    ];
    let mut failed = Vec::new();
    for (i, (name, check)) in checks.iter().enumerate() {
        let start = Instant::now();
        let o = check();
        let verdict = if o.passed { "PASS" } else { "FAIL" };
        println!(
            "criterion {:>2} {verdict} {name}: {} [{:.1} s]",
            i + 1,
            o.detail,
            start.elapsed().as_secs_f64()
        );
        if !o.passed {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
