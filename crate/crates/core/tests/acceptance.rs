//! End-to-end acceptance checks. Each test prints a single pass/fail line
//! and enforces a wall-clock budget.

use std::collections::HashSet;
use std::time::Instant;

use strongdiv_core::breuil::{
    check_sdm_axioms, flatten_s_vec, from_kisin, tor1_with_s,
};
use strongdiv_core::chainring::{
    howell, intersect, kernel, membership, ChainContext, ChainMatrix,
};
use strongdiv_core::kisin::{
    check_height, example_module, hodge_tate_weights, random_extension, random_height_module,
    twist_module, SigmaMat,
};
use strongdiv_core::rng::Rng;
use strongdiv_core::scenario::{
    run_counterexample, run_exactness_suite, run_key_lemma_suite, run_twist_suite,
    standard_context, DEFAULT_SEED,
};

fn finish(name: &str, ok: bool, start: Instant, budget_secs: u64) {
    let secs = start.elapsed().as_secs_f64();
    println!(
        "acceptance {}: {} ({:.2}s)",
        name,
        if ok { "pass" } else { "fail" },
        secs
    );
    assert!(ok, "{} failed", name);
    assert!(secs < budget_secs as f64, "{} exceeded {}s budget", name, budget_secs);
}

#[test]
fn criterion_1_counterexample_reproduction() {
    let start = Instant::now();
    let rep = run_counterexample(3, 6, 54).unwrap();
    let ok = rep.all_pass()
        && rep.claims.iter().any(|c| c.name == "base-change-middle-cohomology-nonzero")
        && rep.claims.iter().any(|c| c.name == "base-change-tail-cohomology-nonzero");
    finish("1-counterexample", ok, start, 30);
}

#[test]
fn criterion_2_tor_obstruction() {
    let start = Instant::now();
    let c = standard_context(3, 4, 54).unwrap();
    let p = c.p() as i64;
    let up = c.sigma_u_pow(c.p() as usize);
    // Koszul resolution of Sigma/(p, u^p)
    let d1 = SigmaMat::new(1, 2, vec![c.sigma_poly(&[p]), up.clone()]).unwrap();
    let d2 = SigmaMat::new(2, 1, vec![up, c.sigma_neg(&c.sigma_poly(&[p]))]).unwrap();
    let tor = tor1_with_s(&c, &d1, &d2).unwrap();
    // cycle (2 b_6, -u^p): 3 * 2 b_6 + u^3 * (-b_3) = 0 because b_3^2 = 6 b_6
    let two_b6 = {
        let mut x = c.s_zero();
        x.coeffs[6] = 2;
        x
    };
    let minus_up = c.s_neg(&c.embed_sigma(&c.sigma_u_pow(3)).unwrap());
    let v = flatten_s_vec(&c, &[two_b6, minus_up], c.precision());
    let ok = tor.homology.cardinality_log_p() > 0 && tor.class_is_nonzero(&v).unwrap();
    finish("2-tor-obstruction", ok, start, 30);
}

#[test]
fn criterion_3_key_lemma() {
    let start = Instant::now();
    let rep = run_key_lemma_suite(3, 4, 30, 200, DEFAULT_SEED).unwrap();
    finish("3-key-lemma", rep.all_pass(), start, 60);
}

#[test]
fn criterion_4_twist_identities() {
    let start = Instant::now();
    let rep = run_twist_suite(5, 4, 24, 3).unwrap();
    finish("4-twist-identities", rep.all_pass(), start, 60);
}

#[test]
fn criterion_5_height_checks() {
    let start = Instant::now();
    let ctx = standard_context(5, 4, 24).unwrap();
    let mk = example_module(&ctx).unwrap();
    let mut ok = check_height(&ctx, &mk, 1).unwrap() && !check_height(&ctx, &mk, 0).unwrap();
    ok = ok && hodge_tate_weights(&ctx, &mk).unwrap() == vec![0, 1];
    let mut rng = Rng::new(DEFAULT_SEED);
    for t in 0..100usize {
        let r = 1 + (t % 2) as u32;
        let m1 = random_height_module(&ctx, 1, r, &mut rng).unwrap();
        let m3 = random_height_module(&ctx, 1, r, &mut rng).unwrap();
        let (a, _b) = random_extension(&ctx, &m1, &m3, &mut rng).unwrap();
        if !check_height(&ctx, &a.target, r).unwrap() {
            ok = false;
        }
    }
    finish("5-height-checks", ok, start, 120);
}

#[test]
fn criterion_6_strong_divisibility_axioms() {
    let start = Instant::now();
    let ctx = standard_context(5, 4, 24).unwrap();
    let mut rng = Rng::new(DEFAULT_SEED);
    let mut ok = true;
    for t in 0..30usize {
        let r = 1 + (t % 2) as u32;
        let d = 1 + (t % 2);
        let m = random_height_module(&ctx, d, r, &mut rng).unwrap();
        let b = from_kisin(&ctx, &m, r).unwrap();
        let rep = check_sdm_axioms(&ctx, &b).unwrap();
        if !rep.all_pass() {
            ok = false;
        }
    }
    // negative controls: damping the Frobenius by p destroys generation
    for r in 1..=2u32 {
        let m = random_height_module(&ctx, 2, r, &mut rng).unwrap();
        let mut b = from_kisin(&ctx, &m, r).unwrap();
        let p = ctx.p();
        for e in b.phi_matrix.entries.iter_mut() {
            *e = ctx.s_scale(e, p);
        }
        let rep = check_sdm_axioms(&ctx, &b).unwrap();
        if rep.all_pass() {
            ok = false;
        }
    }
    // negative control: forgetting the extra filtration on a twist
    {
        let t = twist_module(&ctx, 1).unwrap();
        let mut b = from_kisin(&ctx, &t, 1).unwrap();
        b.fil = b.fil_base.clone();
        b.fil_generators.clear();
        b.phi_r_values.clear();
        let rep = check_sdm_axioms(&ctx, &b).unwrap();
        if rep.all_pass() {
            ok = false;
        }
    }
    finish("6-strong-divisibility", ok, start, 300);
}

#[test]
fn criterion_7_exactness_transport() {
    let start = Instant::now();
    let rep = run_exactness_suite(5, 4, 24, 2, 30, DEFAULT_SEED).unwrap();
    let ok = rep.all_pass()
        && rep.claims.iter().any(|c| c.name == "tensor-preservation")
        && rep.claims.iter().any(|c| c.name == "cup-product-splice")
        && rep.claims.iter().any(|c| c.name == "negative-control-nonsurjective-tail");
    finish("7-exactness-transport", ok, start, 600);
}

// ---- brute-force linear algebra oracle ------------------------------------

fn all_vectors(q: u64, n: usize) -> Vec<Vec<u64>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        let mut next = Vec::new();
        for v in &out {
            for x in 0..q {
                let mut w = v.clone();
                w.push(x);
                next.push(w);
            }
        }
        out = next;
    }
    out
}

fn row_times(c: ChainContext, coeffs: &[u64], m: &ChainMatrix) -> Vec<u64> {
    let mut out = vec![0u64; m.cols()];
    for (i, ci) in coeffs.iter().enumerate() {
        for j in 0..m.cols() {
            out[j] = c.add(out[j], c.mul(*ci, m.get(i, j)));
        }
    }
    out
}

fn brute_span(c: ChainContext, m: &ChainMatrix, combos: &[Vec<u64>]) -> HashSet<Vec<u64>> {
    combos.iter().map(|cf| row_times(c, cf, m)).collect()
}

#[test]
fn criterion_8_linear_algebra_oracle() {
    let start = Instant::now();
    let mut ok = true;
    for p in [2u64, 3] {
        let c = ChainContext::new(p, 2).unwrap();
        let q = p * p;
        for rows in 1..=2usize {
            for cols in 1..=2usize {
                let entry_sets = all_vectors(q, rows * cols);
                let combos = all_vectors(q, rows);
                let vectors = all_vectors(q, cols);
                for entries in &entry_sets {
                    let m = ChainMatrix::new(c, rows, cols, entries.clone()).unwrap();
                    let span = brute_span(c, &m, &combos);
                    let h = howell(&m).unwrap();
                    for v in &vectors {
                        if membership(v, &h).unwrap() != span.contains(v) {
                            ok = false;
                        }
                    }
                    let k = kernel(&m).unwrap();
                    for cf in &combos {
                        let in_kernel = row_times(c, cf, &m).iter().all(|&x| x == 0);
                        if membership(cf, &k).unwrap() != in_kernel {
                            ok = false;
                        }
                    }
                }
            }
        }
        // intersections: all pairs of single rows, plus seeded 2x2 pairs
        let vectors = all_vectors(q, 2);
        for a in &vectors {
            for b in &vectors {
                let ha = howell(&ChainMatrix::new(c, 1, 2, a.clone()).unwrap()).unwrap();
                let hb = howell(&ChainMatrix::new(c, 1, 2, b.clone()).unwrap()).unwrap();
                let i = intersect(&ha, &hb).unwrap();
                for v in &vectors {
                    let expect = membership(v, &ha).unwrap() && membership(v, &hb).unwrap();
                    if membership(v, &i).unwrap() != expect {
                        ok = false;
                    }
                }
            }
        }
        let mut rng = Rng::new(DEFAULT_SEED ^ p);
        for _ in 0..200 {
            let draw = |rng: &mut Rng| (0..4).map(|_| rng.below(q)).collect::<Vec<u64>>();
            let ea = draw(&mut rng);
            let eb = draw(&mut rng);
            let ha = howell(&ChainMatrix::new(c, 2, 2, ea).unwrap()).unwrap();
            let hb = howell(&ChainMatrix::new(c, 2, 2, eb).unwrap()).unwrap();
            let i = intersect(&ha, &hb).unwrap();
            for v in &vectors {
                let expect = membership(v, &ha).unwrap() && membership(v, &hb).unwrap();
                if membership(v, &i).unwrap() != expect {
                    ok = false;
                }
            }
        }
    }
    finish("8-linear-algebra-oracle", ok, start, 60);
}
