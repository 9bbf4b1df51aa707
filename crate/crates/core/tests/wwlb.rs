mod common;

use common::oracle::oracle_g;
use common::*;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sensetrack::model::{GaussianKernel, KernelSet, MarkovChain};
use sensetrack::wwlb::*;
use sensetrack::Error;

fn two_chain() -> MarkovChain {
    MarkovChain::from_columns(&[vec![0.9, 0.1], vec![0.2, 0.8]], &[0.5, 0.5]).unwrap()
}

fn swap() -> TestPoint {
    TestPoint::from_permutation(&[1, 0]).unwrap()
}

fn ones(n: usize) -> DMatrix<f64> {
    DMatrix::from_element(n, n, 1.0)
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

#[test]
fn closed_form_exact_and_oracle_agree_for_bijections() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for trial in 0..12 {
        let n = 2 + trial % 3;
        let chain = random_positive_chain(&mut rng, n);
        let controls: Vec<KernelSet> = (0..3).map(|_| random_kernels(&mut rng, n, 1 + trial % 2)).collect();
        let xi: Vec<DMatrix<f64>> = controls.iter().map(|k| xi_matrix(k).unwrap()).collect();
        let points: Vec<TestPoint> = enumerate_test_points(n, TestPointSet::Permutations)
            .into_iter()
            .filter(|p| p.negate(Negation::Reverse) != *p)
            .collect();
        if points.is_empty() {
            continue;
        }
        let closed = WwlbProblem::new(chain.clone(), xi.clone(), 0, WwlbMode::Paper, Negation::Reverse, 6).unwrap();
        let exact = WwlbProblem::new(chain.clone(), xi.clone(), 0, WwlbMode::Exact, Negation::Reverse, 6).unwrap();
        let mut acc_p = WwlbAccumulator::new(&closed);
        let mut acc_e = WwlbAccumulator::new(&exact);
        let max_k = if n == 4 { 4 } else { 5 };
        for k in 0..=max_k {
            let u = rng.random_range(0..3);
            let h_k = &points[rng.random_range(0..points.len())];
            let h_k1 = &points[rng.random_range(0..points.len())];
            let gp = g_entries(&closed, &acc_p, u, h_k, h_k1).unwrap();
            let ge = g_entries(&exact, &acc_e, u, h_k, h_k1).unwrap();
            let mut xis: Vec<DMatrix<f64>> = acc_p.committed.iter().map(|&c| xi[c].clone()).collect();
            xis.push(xi[u].clone());
            assert_eq!(xis.len(), k + 2);
            let go = oracle_g(&chain, &xis, h_k, h_k1, Negation::Reverse);
            for (a, b, c) in [
                (gp.g_next, ge.g_next, go.g_next),
                (gp.g_cross, ge.g_cross, go.g_cross),
                (gp.g_curr, ge.g_curr, go.g_curr),
            ] {
                assert!(close(a, b, 1e-8), "n={n} k={k}: closed {a} exact {b}");
                assert!(close(a, c, 1e-8), "n={n} k={k}: closed {a} oracle {c}");
            }
            match (advance(&closed, &acc_p, u, h_k, h_k1), advance(&exact, &acc_e, u, h_k, h_k1)) {
                (Ok((jp, np)), Ok((je, ne))) => {
                    assert!(close(jp, je, 1e-8), "J closed {jp} exact {je}");
                    acc_p = np;
                    acc_e = ne;
                }
                (Err(a), Err(b)) => {
                    assert!(matches!(a, Error::DegenerateRecursion(_)));
                    assert!(matches!(b, Error::DegenerateRecursion(_)));
                    break;
                }
                other => panic!("modes disagree on degeneracy: {other:?}"),
            }
        }
    }
}

#[test]
fn exact_mode_matches_oracle_for_shifts() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for n in 2..=3 {
        let chain = random_positive_chain(&mut rng, n);
        let ks: Vec<KernelSet> = (0..2).map(|_| random_kernels(&mut rng, n, 1)).collect();
        let xi: Vec<DMatrix<f64>> = ks.iter().map(|k| xi_matrix(k).unwrap()).collect();
        let exact = WwlbProblem::new(chain.clone(), xi.clone(), 1, WwlbMode::Exact, Negation::Reverse, 4).unwrap();
        let h = TestPoint::shift(n, 1).unwrap();
        let mut acc = WwlbAccumulator::new(&exact);
        for _ in 0..3 {
            let g = g_entries(&exact, &acc, 0, &h, &h).unwrap();
            let mut xis: Vec<DMatrix<f64>> = acc.committed.iter().map(|&c| xi[c].clone()).collect();
            xis.push(xi[0].clone());
            let o = oracle_g(&chain, &xis, &h, &h, Negation::Reverse);
            assert!(close(g.g_next, o.g_next, 1e-10));
            assert!(close(g.g_cross, o.g_cross, 1e-10));
            assert!(close(g.g_curr, o.g_curr, 1e-10));
            acc = advance(&exact, &acc, 0, &h, &h).unwrap().1;
        }
    }
}

// ---------------------------------------------------------------------------
// Monte Carlo over trajectories and observations
// ---------------------------------------------------------------------------

fn draw(rng: &mut ChaCha8Rng, p: &[f64]) -> usize {
    let r: f64 = rng.random();
    let mut acc = 0.0;
    for (i, v) in p.iter().enumerate() {
        acc += v;
        if r < acc {
            return i;
        }
    }
    p.len() - 1
}

#[test]
fn log_terms_match_sampled_defining_expectations() {
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    let n = 3;
    let chain = random_positive_chain(&mut rng, n);
    let k_prev = random_kernels(&mut rng, n, 1);
    let k_next = random_kernels(&mut rng, n, 1);
    let xi_prev = xi_matrix(&k_prev).unwrap();
    let xi_next = xi_matrix(&k_next).unwrap();
    let k = 2;
    let m_prev = sensetrack::model::state_marginal(&chain, k - 1);
    let m_k = sensetrack::model::state_marginal(&chain, k);
    let st = StageTerms {
        trans: chain.trans(),
        prior: chain.prior(),
        prev: Some(&m_prev),
        marg_k: &m_k,
        xi_k: &xi_prev,
        xi_k1: &xi_next,
    };
    let tau = TestPoint::from_permutation(&[2, 0, 1]).unwrap();
    let sigma = TestPoint::shift(n, 1).unwrap();
    let col = |i: usize| -> Vec<f64> { chain.trans().column(i).iter().copied().collect() };
    let samples = 100_000;
    let (mut s_eta, mut s_rho, mut s_zeta) = (vec![], vec![], vec![]);
    for _ in 0..samples {
        let z = draw(&mut rng, m_prev.as_slice());
        let x = draw(&mut rng, &col(z));
        let xp = draw(&mut rng, &col(x));
        let yk = k_prev.kernel(x).sample(&mut rng);
        let yk1 = k_next.kernel(xp).sample(&mut rng);
        let lr_next = |b: Option<usize>| -> f64 {
            b.map_or(0.0, |b| {
                chain.prob(b, x) / chain.prob(xp, x)
                    * (k_next.kernel(b).log_likelihood(&yk1).unwrap() - k_next.kernel(xp).log_likelihood(&yk1).unwrap()).exp()
            })
        };
        let lr_curr = |a: Option<usize>| -> f64 {
            a.map_or(0.0, |a| {
                chain.prob(a, z) * chain.prob(xp, a) / (chain.prob(x, z) * chain.prob(xp, x))
                    * (k_prev.kernel(a).log_likelihood(&yk).unwrap() - k_prev.kernel(x).log_likelihood(&yk).unwrap()).exp()
            })
        };
        let l = lr_next(sigma.target(xp));
        let kk = lr_curr(tau.target(x));
        s_eta.push(l.sqrt());
        s_rho.push(kk.sqrt());
        s_zeta.push((l * kk).sqrt());
    }
    let zero = TestPoint::zero(n);
    for (vals, target) in [
        (s_eta, log_term(LogTermKind::Eta, &st, &sigma, &zero).exp()),
        (s_rho, log_term(LogTermKind::Rho, &st, &tau, &zero).exp()),
        (s_zeta, log_term(LogTermKind::Zeta, &st, &tau, &sigma).exp()),
    ] {
        let m = vals.iter().sum::<f64>() / samples as f64;
        let var = vals.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (samples as f64 - 1.0);
        let se = (var / samples as f64).sqrt();
        assert!((m - target).abs() <= 3.0 * se + 1e-12, "sample mean {m} vs closed form {target} (se {se})");
    }
}

// ---------------------------------------------------------------------------
// Operation examples
// ---------------------------------------------------------------------------

#[test]
fn log_term_examples() {
    let chain = two_chain();
    let xi = ones(2);
    let prior = DVector::from_vec(vec![0.5, 0.5]);
    let st = StageTerms { trans: chain.trans(), prior: &prior, prev: None, marg_k: &prior, xi_k: &xi, xi_k1: &xi };
    let zero = TestPoint::zero(2);
    assert_eq!(log_term(LogTermKind::Eta, &st, &zero, &zero), 0.0);
    let m = DVector::from_vec(vec![0.3, 0.7]);
    let st_prev = StageTerms { prev: Some(&m), ..st };
    assert_eq!(log_term(LogTermKind::Rho, &st_prev, &zero, &zero), 0.0);
    assert_eq!(log_term(LogTermKind::Zeta, &st_prev, &zero, &zero), 0.0);
    assert_eq!(log_term(LogTermKind::Gamma, &st, &zero, &zero), 0.0);
    let h = swap();
    // √(0.25)+√(0.25) = 1
    assert!(log_term(LogTermKind::Gamma, &st, &h, &zero).abs() < 1e-15);
    let literal = h.negate(Negation::Literal);
    assert_eq!(log_term(LogTermKind::Gamma, &st, &h, &literal), f64::NEG_INFINITY);
}

#[test]
fn eta_hand_summation() {
    let chain = two_chain();
    let xi = ones(2);
    let prior = DVector::from_vec(vec![0.5, 0.5]);
    let st = StageTerms { trans: chain.trans(), prior: &prior, prev: None, marg_k: &prior, xi_k: &xi, xi_k1: &xi };
    let v = log_term(LogTermKind::Eta, &st, &swap(), &TestPoint::zero(2));
    // 0.5·2√(0.09) + 0.5·2√(0.16) = 0.7
    let oracle = 0.5 * 2.0 * (0.9f64 * 0.1).sqrt() + 0.5 * 2.0 * (0.2f64 * 0.8).sqrt();
    assert!((oracle - 0.7).abs() < 1e-15);
    assert!((v - 0.7f64.ln()).abs() < 1e-12);
    assert!((v + 0.356675).abs() < 1e-6);
}

#[test]
fn identity_chain_is_degenerate() {
    let id = MarkovChain::from_columns(&[vec![1.0, 0.0], vec![0.0, 1.0]], &[0.5, 0.5]).unwrap();
    for mode in [WwlbMode::Paper, WwlbMode::Exact] {
        let p = WwlbProblem::new(id.clone(), vec![ones(2)], 0, mode, Negation::Reverse, 3).unwrap();
        let acc = WwlbAccumulator::new(&p);
        let r = g_entries(&p, &acc, 0, &swap(), &swap());
        assert_eq!(r, Err(Error::DegenerateTestPoint));
    }
}

#[test]
fn j0_examples() {
    let chain = MarkovChain::from_columns(&[vec![0.5, 0.5], vec![0.5, 0.5]], &[0.5, 0.5]).unwrap();
    // Literal negation reproduces the hand value 2(1 − 0)/1.
    let p = WwlbProblem::new(chain.clone(), vec![ones(2)], 0, WwlbMode::Paper, Negation::Literal, 1).unwrap();
    assert!((j0(&p, &swap()).unwrap() - 2.0).abs() < 1e-15);
    // The swap is its own inverse, so the reversed convention has no information.
    let p = WwlbProblem::new(chain.clone(), vec![ones(2)], 0, WwlbMode::Paper, Negation::Reverse, 1).unwrap();
    assert_eq!(j0(&p, &swap()).unwrap(), 0.0);
    // Exact mode with a fixed unit shift: bound equals the minimum MSE of the two-point prior.
    let p = WwlbProblem::new(chain.clone(), vec![ones(2)], 0, WwlbMode::Exact, Negation::Reverse, 1).unwrap();
    let j = j0(&p, &TestPoint::shift(2, 1).unwrap()).unwrap();
    assert!((j - 4.0).abs() < 1e-15);
    assert!((wwlb_bound(j, 1.0).unwrap() - 0.25).abs() < 1e-15);
}

#[test]
fn j0_grows_as_kernels_separate() {
    let chain = MarkovChain::from_columns(&[vec![0.5, 0.5], vec![0.5, 0.5]], &[0.5, 0.5]).unwrap();
    let mut last = 0.0;
    for xi in [1e-2, 1e-4, 1e-6] {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, xi, xi, 1.0]);
        let p = WwlbProblem::new(chain.clone(), vec![m.clone()], 0, WwlbMode::Paper, Negation::Literal, 1).unwrap();
        let j = j0(&p, &swap()).unwrap();
        assert!((j - 2.0 / (xi * xi)).abs() <= 1e-9 * j);
        let p = WwlbProblem::new(chain.clone(), vec![m], 0, WwlbMode::Exact, Negation::Reverse, 1).unwrap();
        let je = j0(&p, &TestPoint::shift(2, 1).unwrap()).unwrap();
        assert!((je - 4.0 / (xi * xi)).abs() <= 1e-9 * je);
        assert!(j > last);
        last = j;
    }
}

#[test]
fn advance_boundary_collapse() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let chain = random_positive_chain(&mut rng, 3);
    let xi = vec![xi_matrix(&random_kernels(&mut rng, 3, 1)).unwrap()];
    let p = WwlbProblem::new(chain, xi, 0, WwlbMode::Paper, Negation::Reverse, 3).unwrap();
    let acc = WwlbAccumulator::new(&p);
    let h = TestPoint::from_permutation(&[1, 2, 0]).unwrap();
    let g = g_entries(&p, &acc, 0, &h, &h).unwrap();
    let (j1, next) = advance(&p, &acc, 0, &h, &h).unwrap();
    assert_eq!(next.a_value, Some(g.g_curr));
    assert!((j1 - (g.g_next - g.g_cross * g.g_cross / g.g_curr)).abs() < 1e-15);
    assert!(j1 <= g.g_next);
    assert_eq!(next.committed, vec![0, 0]);
}

#[test]
fn uninformative_three_cycle_matches_exact() {
    let chain = MarkovChain::from_columns(
        &[vec![0.6, 0.3, 0.1], vec![0.2, 0.5, 0.3], vec![0.25, 0.25, 0.5]],
        &[0.2, 0.3, 0.5],
    )
    .unwrap();
    let h = TestPoint::from_permutation(&[1, 2, 0]).unwrap();
    let mk = |mode| WwlbProblem::new(chain.clone(), vec![ones(3)], 0, mode, Negation::Reverse, 3).unwrap();
    let (pp, pe) = (mk(WwlbMode::Paper), mk(WwlbMode::Exact));
    let (jp, ap) = advance(&pp, &WwlbAccumulator::new(&pp), 0, &h, &h).unwrap();
    let (je, ae) = advance(&pe, &WwlbAccumulator::new(&pe), 0, &h, &h).unwrap();
    assert!((1.0 / jp - 1.0 / je).abs() < 1e-9);
    let (jp2, _) = advance(&pp, &ap, 0, &h, &h).unwrap();
    let (je2, _) = advance(&pe, &ae, 0, &h, &h).unwrap();
    assert!((1.0 / jp2 - 1.0 / je2).abs() < 1e-9);
}

#[test]
fn v_score_examples() {
    let chain = two_chain();
    let xi_weak = xi_matrix(&scalar_set(&[0.0, 1.0], &[1.0, 1.0])).unwrap();
    let xi_strong = xi_matrix(&scalar_set(&[0.0, 3.0], &[1.0, 1.0])).unwrap();
    let p = WwlbProblem::new(chain, vec![xi_weak, xi_strong], 0, WwlbMode::Exact, Negation::Reverse, 3).unwrap();
    let acc = WwlbAccumulator::new(&p);
    let up = TestPoint::shift(2, 1).unwrap();
    let down = TestPoint::shift(2, -1).unwrap();
    let single = vec![(up.clone(), up.clone())];
    let s = v_score(&p, &acc, 0, &single).unwrap();
    let (j, _) = advance(&p, &acc, 0, &up, &up).unwrap();
    assert!((s.v - 1.0 / j).abs() < 1e-15);
    let more = vec![(up.clone(), up.clone()), (down.clone(), up.clone()), (up.clone(), down.clone())];
    assert!(v_score(&p, &acc, 0, &more).unwrap().v >= s.v);
    let all = all_pairs(&enumerate_test_points(2, TestPointSet::Shifts));
    let weak = v_score(&p, &acc, 0, &all).unwrap().v;
    let strong = v_score(&p, &acc, 1, &all).unwrap().v;
    assert!(strong < weak);
}

#[test]
fn all_degenerate_pairs() {
    let chain = two_chain();
    let p = WwlbProblem::new(chain, vec![ones(2)], 0, WwlbMode::Paper, Negation::Reverse, 3).unwrap();
    let acc = WwlbAccumulator::new(&p);
    let pairs = vec![(swap(), swap())];
    assert_eq!(v_score(&p, &acc, 0, &pairs), Err(Error::AllTestPointsDegenerate));
}

#[test]
fn bound_values() {
    assert_eq!(wwlb_bound(2.0, 1.0).unwrap(), 0.5);
    assert_eq!(wwlb_bound(4.0, 1.0).unwrap(), 0.25);
    assert!(matches!(wwlb_bound(0.0, 1.0), Err(Error::NonpositiveInformation(_))));
}

#[test]
fn bhattacharyya_matches_numeric_integral_in_three_dimensions() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let ks = random_kernels(&mut rng, 2, 3);
    let (a, b) = (ks.kernel(0), ks.kernel(1));
    let xi = bhattacharyya(a, b).unwrap();
    // ∫√(f_a f_b) = E_{y~q} √(f_a f_b)/q with q the Gaussian at the midpoint mean and average covariance.
    let q = GaussianKernel::new((a.mean() + b.mean()) * 0.5, (a.cov() + b.cov()) * 0.5).unwrap();
    let z = sensetrack::dp::qmc_normals(1 << 20, 3, 9);
    let mut s = 0.0;
    for zi in &z {
        let y = q.mean() + q.sample_factor() * DVector::from_column_slice(zi);
        let la = a.log_likelihood(&y).unwrap();
        let lb = b.log_likelihood(&y).unwrap();
        s += (0.5 * (la + lb) - q.log_likelihood(&y).unwrap()).exp();
    }
    let numeric = s / z.len() as f64;
    assert!((numeric - xi).abs() < 1e-4, "numeric {numeric} closed form {xi}");
}

#[test]
fn chernoff_half_is_bhattacharyya_distance() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..200 {
        let d = rng.random_range(1..4);
        let ks = random_kernels(&mut rng, 2, d);
        let (a, b) = (ks.kernel(0), ks.kernel(1));
        let xi = bhattacharyya(a, b).unwrap();
        assert!(xi > 0.0 && xi <= 1.0);
        assert!((xi - bhattacharyya(b, a).unwrap()).abs() < 1e-15);
        assert!((chernoff_exponent(a, b, 0.5).unwrap() + xi.ln()).abs() < 1e-12);
    }
    let k = GaussianKernel::scalar(1.0, 2.0).unwrap();
    assert_eq!(bhattacharyya(&k, &k.clone()).unwrap(), 1.0);
}
