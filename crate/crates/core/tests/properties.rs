use proptest::prelude::*;

use sparsum_core::energy::{d_times_with, difference_product_histogram, relation_gap_closed_form, ConvolutionRoute};
use sparsum_core::field::{divisors, is_prime};
use sparsum_core::incidence::second_moment_closed_form;
use sparsum_core::{
    collinear_triples, collinear_triples_bruteforce, d_times, eval_sparse_sum, iota_moments, line_histogram,
    make_field, mult_char, mult_energy, t_energy_relation, three_fold_sumset, CharacterId, SparsePoly,
};

fn prime_in(lo: u64, hi: u64) -> impl Strategy<Value = u64> {
    (lo..=hi).prop_filter_map("prime", |n| (n > 2 && is_prime(n)).then_some(n))
}

/// A prime together with a set of distinct nonzero residues.
fn unit_set(lo: u64, hi: u64, max_len: usize) -> impl Strategy<Value = (u64, Vec<u64>)> {
    prime_in(lo, hi).prop_flat_map(move |p| {
        let len = max_len.min(p as usize - 1);
        (Just(p), prop::collection::btree_set(1..p, 1..=len).prop_map(|s| s.into_iter().collect()))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dlog_is_a_homomorphism(p in prime_in(3, 200_000), x in 1u64..u64::MAX, y in 1u64..u64::MAX) {
        let ctx = make_field(p).unwrap();
        let (x, y) = (x % (p - 1) + 1, y % (p - 1) + 1);
        let (lx, ly) = (ctx.dlog(x).unwrap(), ctx.dlog(y).unwrap());
        prop_assert_eq!(ctx.dlog(ctx.mul(x, y)).unwrap(), (lx + ly) % (p - 1));
        prop_assert_eq!(ctx.pow(ctx.primitive_root(), lx), x);
    }

    #[test]
    fn subgroups_are_closed(p in prime_in(3, 3000), pick in any::<prop::sample::Index>()) {
        let ctx = make_field(p).unwrap();
        let ds = divisors(p - 1);
        let d = ds[pick.index(ds.len())];
        let g = ctx.subgroup(d).unwrap();
        prop_assert_eq!(g.len() as u64, d);
        for &x in g.elements() {
            prop_assert_eq!(ctx.pow(x, d), 1);
            prop_assert!(g.contains(ctx.mul(x, g.generator())));
            prop_assert!(g.contains(ctx.inv(x).unwrap()));
        }
    }

    #[test]
    fn translate_and_dilate_invert((p, set) in unit_set(3, 1000, 20), shift in 0u64..1000, scale in 1u64..1000) {
        let ctx = make_field(p).unwrap();
        let scale = scale % (p - 1) + 1;
        let there = ctx.translate_set(&set, shift);
        prop_assert_eq!(ctx.translate_set(&there, ctx.neg(ctx.reduce(shift))), set.clone());
        let dilated = ctx.dilate_set(&set, scale).unwrap();
        prop_assert_eq!(ctx.dilate_set(&dilated, ctx.inv(scale).unwrap()).unwrap(), set);
    }

    #[test]
    fn triples_match_enumeration((p, u1) in unit_set(3, 31, 5), seed in any::<u64>(), l1 in 1u64..31, l2 in 1u64..31) {
        let ctx = make_field(p).unwrap();
        let u2: Vec<u64> = u1.iter().map(|&x| ctx.add(x, seed % p)).filter(|&x| x != 0).collect();
        prop_assume!(!u2.is_empty());
        let (l1, l2) = (l1 % (p - 1) + 1, l2 % (p - 1) + 1);
        prop_assert_eq!(
            collinear_triples(&ctx, &u1, &u2, l1, l2).unwrap(),
            collinear_triples_bruteforce(&ctx, &u1, &u2, l1, l2).unwrap()
        );
    }

    #[test]
    fn triples_are_symmetric_and_bounded((p, u1) in unit_set(5, 400, 30), shift in 1u64..400, l1 in 1u64..400, l2 in 1u64..400) {
        let ctx = make_field(p).unwrap();
        let u2: Vec<u64> = ctx.translate_set(&u1, shift).into_iter().filter(|&x| x != 0).collect();
        prop_assume!(!u2.is_empty());
        let (l1, l2) = (l1 % (p - 1) + 1, l2 % (p - 1) + 1);
        let t = collinear_triples(&ctx, &u1, &u2, l1, l2).unwrap();
        prop_assert_eq!(t, collinear_triples(&ctx, &u2, &u1, l2, l1).unwrap());
        prop_assert!(t <= (u1.len() as u128).pow(3) * (u2.len() as u128).pow(3));
    }

    #[test]
    fn subgroup_triples_are_dilation_invariant(p in prime_in(5, 2000), pick in any::<prop::sample::Index>(), lambda in 1u64..2000) {
        let ctx = make_field(p).unwrap();
        let ds: Vec<u64> = divisors(p - 1).into_iter().filter(|&d| d <= 200).collect();
        let g = ctx.subgroup(ds[pick.index(ds.len())]).unwrap();
        let lambda = lambda % (p - 1) + 1;
        let moved = ctx.dilate_set(g.elements(), g.generator()).unwrap();
        prop_assert_eq!(
            collinear_triples(&ctx, g.elements(), g.elements(), 1, lambda).unwrap(),
            collinear_triples(&ctx, &moved, &moved, 1, lambda).unwrap()
        );
    }

    #[test]
    fn incidence_moments_have_closed_forms(p in prime_in(5, 101), seed in any::<u64>(), lambda in 1u64..101, mu in 1u64..101) {
        let ctx = make_field(p).unwrap();
        let a: Vec<u64> = (0..6).map(|i| seed.rotate_left(i * 7) % p).collect();
        let b: Vec<u64> = (0..4).map(|i| seed.rotate_left(i * 11 + 3) % p).collect();
        let (a, b) = (ctx.normalize_set(&a), ctx.normalize_set(&b));
        let (lambda, mu) = (lambda % (p - 1) + 1, mu % (p - 1) + 1);
        let (na, nb, pp) = (a.len() as u128, b.len() as u128, p as u128);
        let m = iota_moments(&ctx, &a, &b, lambda, mu).unwrap();
        prop_assert_eq!(m.first, pp * na * nb);
        prop_assert_eq!(m.first_scaled, pp * na * nb);
        prop_assert_eq!(m.second, second_moment_closed_form(&ctx, &a, &b, lambda, mu).unwrap());
        let unit = iota_moments(&ctx, &a, &b, 1, 1).unwrap();
        prop_assert_eq!(unit.second, na * na * nb * nb - na * nb * nb + pp * na * nb);
    }

    #[test]
    fn histogram_respects_bounds(p in prime_in(3, 200), seed in any::<u64>()) {
        let ctx = make_field(p).unwrap();
        let a = ctx.normalize_set(&(0..8).map(|i| seed.rotate_left(i * 5) % p).collect::<Vec<_>>());
        let b = ctx.normalize_set(&(0..5).map(|i| seed.rotate_left(i * 9 + 1) % p).collect::<Vec<_>>());
        let h = line_histogram(&ctx, &a, &b).unwrap();
        prop_assert_eq!(h.total(), p * (a.len() * b.len()) as u64);
        for slope in 1..p {
            prop_assert!(h.row(slope).iter().all(|&c| c as usize <= a.len().min(b.len())));
        }
    }

    #[test]
    fn energy_is_symmetric_and_dilation_invariant(p in prime_in(3, 300), seed in any::<u64>(), c in 1u64..300) {
        let ctx = make_field(p).unwrap();
        let u = ctx.normalize_set(&(0..7).map(|i| seed.rotate_left(i * 3) % p).collect::<Vec<_>>());
        let v = ctx.normalize_set(&(0..5).map(|i| seed.rotate_left(i * 13 + 2) % p).collect::<Vec<_>>());
        let c = c % (p - 1) + 1;
        let e = mult_energy(&ctx, &u, &v).unwrap();
        prop_assert_eq!(e, mult_energy(&ctx, &v, &u).unwrap());
        prop_assert_eq!(e, mult_energy(&ctx, &ctx.dilate_set(&u, c).unwrap(), &v).unwrap());
        prop_assert_eq!(e, mult_energy(&ctx, &u, &ctx.dilate_set(&v, c).unwrap()).unwrap());
    }

    #[test]
    fn subgroup_energy_is_cubic(p in prime_in(3, 5000), pick in any::<prop::sample::Index>()) {
        let ctx = make_field(p).unwrap();
        let ds: Vec<u64> = divisors(p - 1).into_iter().filter(|&d| d <= 500).collect();
        let g = ctx.subgroup(ds[pick.index(ds.len())]).unwrap();
        prop_assert_eq!(mult_energy(&ctx, g.elements(), g.elements()).unwrap(), (g.order() as u128).pow(3));
    }

    #[test]
    fn d_times_invariants((p, u) in unit_set(3, 2000, 40), c in 1u64..2000) {
        let ctx = make_field(p).unwrap();
        let c = c % (p - 1) + 1;
        let d = d_times(&ctx, &u).unwrap();
        prop_assert_eq!(d, d_times(&ctx, &ctx.dilate_set(&u, c).unwrap()).unwrap());
        prop_assert_eq!(d, d_times_with(&ctx, &u, ConvolutionRoute::Direct).unwrap());
        prop_assert_eq!(d, d_times_with(&ctx, &u, ConvolutionRoute::Transform).unwrap());
        let n = u.len() as u64;
        let h = difference_product_histogram(&ctx, &u, ConvolutionRoute::Auto).unwrap();
        prop_assert_eq!(h[0], n * n * (2 * n - 1));
        prop_assert_eq!(h.iter().sum::<u64>(), n.pow(4));
        prop_assert!(d >= (h[0] as u128).pow(2));
    }

    #[test]
    fn relation_gap_is_the_excluded_count(p in prime_in(5, 499), gi in any::<prop::sample::Index>(), hi in any::<prop::sample::Index>(), lambda in 1u64..499, mu in 1u64..499) {
        let ctx = make_field(p).unwrap();
        let ds: Vec<u64> = divisors(p - 1).into_iter().filter(|&d| d <= 40).collect();
        let g = ctx.subgroup(ds[gi.index(ds.len())]).unwrap();
        let h = ctx.subgroup(ds[hi.index(ds.len())]).unwrap();
        let (lambda, mu) = (lambda % (p - 1) + 1, mu % (p - 1) + 1);
        let rel = t_energy_relation(&ctx, &g, &h, lambda, mu).unwrap();
        prop_assert!(rel.gap >= 0);
        prop_assert_eq!(rel.gap, relation_gap_closed_form(&ctx, &g, &h, lambda, mu).unwrap());
    }

    #[test]
    fn exponents_reduce_mod_group_order(p in prime_in(3, 3000), k in 1u64..3000, a in 1u64..3000, j in 0u64..3000) {
        let ctx = make_field(p).unwrap();
        let k = k % (p - 1) + 1;
        let j = CharacterId::new(&ctx, j % (p - 1)).unwrap();
        let a = a % (p - 1) + 1;
        let base = eval_sparse_sum(&ctx, &SparsePoly::new(&ctx, &[(a, k)]).unwrap(), j);
        let lifted = eval_sparse_sum(&ctx, &SparsePoly::new(&ctx, &[(a, k + (p - 1))]).unwrap(), j);
        prop_assert!((base - lifted).norm() <= 1e-9 * (p as f64));
    }

    #[test]
    fn multiplicative_characters_are_multiplicative(p in prime_in(3, 100_000), x in 1u64..100_000, y in 1u64..100_000, j in 0u64..100_000) {
        let ctx = make_field(p).unwrap();
        let (x, y) = (x % (p - 1) + 1, y % (p - 1) + 1);
        let j = CharacterId::new(&ctx, j % (p - 1)).unwrap();
        let lhs = mult_char(&ctx, j, ctx.mul(x, y)).unwrap();
        let rhs = mult_char(&ctx, j, x).unwrap() * mult_char(&ctx, j, y).unwrap();
        prop_assert!((lhs - rhs).norm() < 1e-9);
    }

    #[test]
    fn sumsets_contain_a_translate_and_respect_dilation(p in prime_in(5, 499), pick in any::<prop::sample::Index>(), lambda in 1u64..499, mu in 1u64..499) {
        let ctx = make_field(p).unwrap();
        let ds = divisors(p - 1);
        let g = ctx.subgroup(ds[pick.index(ds.len())]).unwrap();
        let (lambda, mu) = (lambda % (p - 1) + 1, mu % (p - 1) + 1);
        let s = three_fold_sumset(&ctx, &g, lambda, mu).unwrap();
        prop_assert!(s.size >= g.order());
        prop_assert_eq!(s.missing_nonzero, p - 1 - s.members.iter().filter(|&&x| x != 0).count() as u64);
        let unit = three_fold_sumset(&ctx, &g, 1, 1).unwrap();
        let moved = ctx.dilate_set(&unit.members, g.generator()).unwrap();
        prop_assert_eq!(moved, unit.members);
    }
}
