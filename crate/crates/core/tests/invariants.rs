use morse_boundary::algebra::{homology, smith_normal_form, Direction, IntMatrix, IntPolynomial, IntegerChainComplex};
use morse_boundary::catalog;
use morse_boundary::chart::Vector;
use proptest::prelude::*;

fn det(m: &[Vec<i64>]) -> i64 {
    match m.len() {
        0 => 1,
        1 => m[0][0],
        _ => (0..m.len())
            .map(|j| {
                let minor: Vec<Vec<i64>> = m[1..].iter().map(|r| [&r[..j], &r[j + 1..]].concat()).collect();
                (if j % 2 == 0 { 1 } else { -1 }) * m[0][j] * det(&minor)
            })
            .sum(),
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

fn choose(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    if n < k {
        return vec![];
    }
    let mut out = choose(n - 1, k);
    for mut s in choose(n - 1, k - 1) {
        s.push(n - 1);
        out.push(s);
    }
    out
}

// invariant factors as ratios of gcds of k×k minors
fn oracle(m: &[Vec<i64>]) -> Vec<i64> {
    let mut prev = 1;
    let mut out = Vec::new();
    for k in 1..=m.len().min(m[0].len()) {
        let mut g = 0;
        for r in choose(m.len(), k) {
            for c in choose(m[0].len(), k) {
                let minor: Vec<Vec<i64>> = r.iter().map(|&i| c.iter().map(|&j| m[i][j]).collect()).collect();
                g = gcd(g, det(&minor));
            }
        }
        if g == 0 {
            break;
        }
        out.push(g / prev);
        prev = g;
    }
    out
}

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = Vec<Vec<i64>>> {
    prop::collection::vec(prop::collection::vec(-5i64..=5, cols), rows)
}

/// A two-step chain complex `F_2 -> F_1 -> F_0` with `∂_2 ∂_1 = 0` by block structure.
fn complex() -> impl Strategy<Value = IntegerChainComplex> {
    (1usize..3, 1usize..3, 1usize..3, 1usize..3)
        .prop_flat_map(|(n0, a, b, n2)| (matrix(a, n0), matrix(n2, b), Just((n0, a, b, n2))))
        .prop_map(|(x, y, (n0, a, b, n2))| {
            let mut d1 = vec![vec![0; n0]; a + b];
            d1[..a].clone_from_slice(&x);
            let d2: Vec<Vec<i64>> = y.iter().map(|r| [vec![0; a], r.clone()].concat()).collect();
            let gens = vec![(0..n0).collect(), (0..a + b).map(|i| 10 + i).collect(), (0..n2).map(|i| 20 + i).collect()];
            IntegerChainComplex::new(gens, vec![IntMatrix::from_rows(&d1), IntMatrix::from_rows(&d2)], Direction::Chain).unwrap()
        })
}

fn shuffle(n: usize, seed: u64) -> (Vec<usize>, Vec<i64>) {
    let mut perm: Vec<usize> = (0..n).collect();
    let mut s = seed;
    for i in (1..n).rev() {
        s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        perm.swap(i, (s >> 33) as usize % (i + 1));
    }
    let signs = (0..n).map(|i| if (seed >> i) & 1 == 1 { -1 } else { 1 }).collect();
    (perm, signs)
}

fn relabel(cx: &IntegerChainComplex, seed: u64) -> IntegerChainComplex {
    let shuffles: Vec<_> = (0..=cx.top).map(|k| shuffle(cx.rank(k), seed.rotate_left(7 * k as u32))).collect();
    let gens = (0..=cx.top).map(|k| shuffles[k].0.iter().map(|&i| cx.generators[k][i]).collect()).collect();
    let maps = (1..=cx.top)
        .map(|k| {
            let (pr, sr) = &shuffles[k];
            let (pc, sc) = &shuffles[k - 1];
            cx.map(k).signed_row_permutation(pr, sr).transpose().signed_row_permutation(pc, sc).transpose()
        })
        .collect();
    IntegerChainComplex::new(gens, maps, cx.direction).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn smith_form_matches_minor_oracle(m in matrix(4, 4)) {
        let snf = smith_normal_form(&IntMatrix::from_rows(&m));
        let got: Vec<i64> = snf.diagonal.iter().map(|d| i64::try_from(d).unwrap()).collect();
        prop_assert_eq!(got, oracle(&m));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn homology_ignores_signed_relabeling(cx in complex(), seed in any::<u64>()) {
        prop_assert_eq!(homology(&cx), homology(&relabel(&cx, seed)));
    }

    #[test]
    fn euler_characteristic_of_homology(cx in complex()) {
        prop_assert_eq!(cx.euler_characteristic(), homology(&cx).euler_characteristic());
    }

    #[test]
    fn dual_shifts_torsion_up(cx in complex()) {
        let h = homology(&cx);
        let hd = homology(&cx.dual());
        prop_assert_eq!(&h.betti, &hd.betti);
        for k in 0..cx.top {
            prop_assert_eq!(&h.torsion[k], &hd.torsion[k + 1]);
        }
        prop_assert!(hd.torsion[0].is_empty());
    }

    #[test]
    fn quotient_by_one_plus_t_round_trips(q in prop::collection::vec(0i64..5, 1..5), p in prop::collection::vec(0i64..3, 1..5)) {
        let q = IntPolynomial::new(q);
        let p = IntPolynomial::new(p);
        let m = p.add(&q.add(&IntPolynomial::new(std::iter::once(0).chain(q.coeffs().iter().copied()).collect())));
        let got = morse_boundary::algebra::morse_inequality_quotient(&m, &p).unwrap();
        prop_assert_eq!(got, q);
    }

    #[test]
    fn deck_powers_compose_and_canonicalize(u in -20.0f64..20.0, v in -0.99f64..0.99, j in -4i64..4, k in -4i64..4) {
        let chart = catalog::get("moebius").unwrap().chart;
        let x = Vector::from_vec(vec![u, v]);
        let once = chart.deck(&chart.deck(&x, j), k);
        let both = chart.deck(&x, j + k);
        prop_assert!((once - &both).norm() < 1e-9);
        let (canon, n) = chart.canonicalize(&x);
        prop_assert!((chart.deck(&canon, n) - &x).norm() < 1e-9);
        // orientation sign of a deck power is a homomorphism
        let sign = |m: i64| chart.deck_vector(&Vector::from_vec(vec![0.0, 1.0]), m)[1];
        prop_assert_eq!(sign(j) * sign(k), sign(j + k));
    }
}
