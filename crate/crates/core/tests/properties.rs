use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use proptest::prelude::*;

use nielsen_core::generate::Generator;
use nielsen_core::linalg::{IntMat, RatMat};
use nielsen_core::morphism::{SublatticeChain, TowerMorphism};
use nielsen_core::nielsen::{
    nil_coincidence, nvalued_nielsen, projection_coincidence, solv_coincidence, torus_coincidence, CoincidenceInput,
    NValuedInput,
};
use nielsen_core::tower::{netness_check, nr_check, HolonomySpec, InfraSpec, LevelStatus, TowerSpec};

const BOUND: u32 = 3;

fn conj(p: &IntMat, m: &IntMat) -> IntMat {
    p.mul(m).unwrap().mul(&p.inverse_unimodular().unwrap()).unwrap()
}

fn conj_rat(p: &IntMat, m: &RatMat) -> RatMat {
    p.to_rat().mul(m).unwrap().mul(&p.inverse_unimodular().unwrap().to_rat()).unwrap()
}

/// The same configuration written in the bases `P_i`: every level matrix is
/// conjugated, chains become `P_i·B_i`, and the level-0 generators of the new
/// coordinates act by `P_i·μ_i(P_0^{-1}·e_t)·P_i^{-1}`.
fn change_basis(input: &NValuedInput, ps: &[IntMat]) -> NValuedInput {
    let tower = &input.infra.tower;
    let p0_inv = ps[0].inverse_unimodular().unwrap();
    let actions = (1..=tower.depth())
        .map(|i| (0..tower.base_rank()).map(|t| conj(&ps[i], &tower.mu(i, &p0_inv.col(t)).unwrap())).collect())
        .collect();
    let new_tower = TowerSpec::new(tower.ranks().to_vec(), actions).unwrap();
    let h = &input.infra.holonomy;
    let matrices = (0..h.order()).map(|q| h.matrices(q).iter().zip(ps).map(|(a, p)| conj(p, a)).collect()).collect();
    let holonomy = HolonomySpec::new(h.labels().to_vec(), h.identity(), h.table().to_vec(), matrices).unwrap();
    let infra = InfraSpec::new(new_tower, holonomy).unwrap();
    let chain = SublatticeChain::new(input.chain.bases().iter().zip(ps).map(|(b, p)| p.mul(b).unwrap()).collect()).unwrap();
    let branches = input
        .branches
        .iter()
        .map(|f| TowerMorphism::new(chain.clone(), f.matrices().iter().zip(ps).map(|(m, p)| conj_rat(p, m)).collect()).unwrap())
        .collect();
    NValuedInput::new(infra, chain, branches, input.sigma.clone()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn basis_change_leaves_every_term_unchanged(seed in any::<u64>()) {
        let mut gen = Generator::new(seed);
        let input = gen.nvalued();
        let ps: Vec<IntMat> = input.infra.tower.ranks().iter().map(|&k| gen.unimodular(k)).collect();
        let moved = change_basis(&input, &ps);
        let a = nvalued_nielsen(&input, BOUND).unwrap();
        let b = nvalued_nielsen(&moved, BOUND).unwrap();
        prop_assert_eq!(&a.value, &b.value);
        for (s, t) in a.terms.iter().zip(&b.terms) {
            prop_assert_eq!(&s.level_factors, &t.level_factors);
        }
    }

    #[test]
    fn basis_change_leaves_projection_coincidence_unchanged(seed in any::<u64>()) {
        let mut gen = Generator::new(seed);
        let (tower, f) = gen.projection_input();
        let input = NValuedInput::new(InfraSpec::untwisted(tower), f.chain().clone(), vec![f], None).unwrap();
        let ps: Vec<IntMat> = input.infra.tower.ranks().iter().map(|&k| gen.unimodular(k)).collect();
        let moved = change_basis(&input, &ps);
        let a = projection_coincidence(&input.infra.tower, &input.branches[0], BOUND).unwrap();
        let b = projection_coincidence(&moved.infra.tower, &moved.branches[0], BOUND).unwrap();
        prop_assert_eq!(a.value, b.value);
        prop_assert_eq!(a.coincidence_factors, b.coincidence_factors);
    }

    #[test]
    fn nr_verdict_is_invariant_under_fibre_conjugation(seed in any::<u64>()) {
        let mut gen = Generator::new(seed);
        let tower = gen.nvalued().infra.tower;
        let actions = (1..=tower.depth())
            .map(|i| {
                let p = gen.unimodular(tower.rank(i));
                tower.generators(i).iter().map(|m| conj(&p, m)).collect()
            })
            .collect();
        let moved = TowerSpec::new(tower.ranks().to_vec(), actions).unwrap();
        let a = nr_check(&tower, BOUND).unwrap();
        let b = nr_check(&moved, BOUND).unwrap();
        let statuses = |v: &nielsen_core::tower::NetnessVerdict| v.levels.iter().map(|l| l.status).collect::<Vec<_>>();
        prop_assert_eq!(statuses(&a), statuses(&b));
    }

    #[test]
    fn net_implies_nr_for_every_bound(seed in any::<u64>(), k in 1usize..=3) {
        let mut gen = Generator::new(seed);
        let tower = if seed % 2 == 0 {
            gen.nvalued().infra.tower
        } else {
            let m = gen.unimodular(k);
            let n = m.mul(&m).unwrap().neg();
            TowerSpec::new(vec![2, k], vec![vec![m, n]]).unwrap()
        };
        if netness_check(&tower, BOUND).unwrap().is_net() {
            for bound in 0..=4 {
                prop_assert_ne!(nr_check(&tower, bound).unwrap().overall(), LevelStatus::NotNr);
            }
        }
    }

    #[test]
    fn single_generator_verdict_does_not_depend_on_the_bound(seed in any::<u64>(), k in 1usize..=3) {
        let mut gen = Generator::new(seed);
        let m = gen.unimodular(k);
        let tower = TowerSpec::new(vec![1, k], vec![vec![m]]).unwrap();
        let first = nr_check(&tower, 1).unwrap().overall();
        for bound in 2..=5 {
            prop_assert_eq!(nr_check(&tower, bound).unwrap().overall(), first);
        }
    }

    #[test]
    fn single_valued_untwisted_value_is_the_level_product(seed in any::<u64>()) {
        let input = Generator::new(seed).nilpotent_single();
        let r = nvalued_nielsen(&input, BOUND).unwrap();
        let mut product = num_rational::BigRational::from_integer(BigInt::from(1));
        for m in input.branches[0].matrices() {
            product *= RatMat::identity(m.rows()).sub(m).unwrap().determinant().unwrap().abs();
        }
        prop_assert_eq!(num_rational::BigRational::from_integer(r.value), product);
    }

    #[test]
    fn depth_zero_coincidence_is_the_torus_formula(seed in any::<u64>()) {
        let (f, g) = Generator::new(seed).torus_pair();
        let k = f.rows();
        let chain = SublatticeChain::identity(&[k]);
        let input = CoincidenceInput::new(
            TowerSpec::torus(k),
            TowerMorphism::from_integer(chain.clone(), vec![f.clone()]).unwrap(),
            TowerMorphism::from_integer(chain, vec![g.clone()]).unwrap(),
        )
        .unwrap();
        prop_assert_eq!(solv_coincidence(&input, BOUND).unwrap().value, torus_coincidence(&f, &g).unwrap());
    }

    #[test]
    fn solvable_coincidence_splits_off_the_base(seed in any::<u64>()) {
        let (tower, f) = Generator::new(seed).projection_input();
        let g = TowerMorphism::identity(f.chain().clone());
        let yf = f.images().unwrap();
        let yg = g.images().unwrap();
        let input = CoincidenceInput::new(tower, f, g).unwrap();
        let solv = solv_coincidence(&input, BOUND).unwrap().value;
        let upper: Vec<(IntMat, IntMat)> = yf[1..].iter().cloned().zip(yg[1..].iter().cloned()).collect();
        prop_assert_eq!(solv, torus_coincidence(&yf[0], &yg[0]).unwrap() * nil_coincidence(&upper).unwrap());
    }

    #[test]
    fn values_are_nonnegative_integers(seed in any::<u64>()) {
        let r = nvalued_nielsen(&Generator::new(seed).nvalued(), BOUND).unwrap();
        prop_assert!(!r.value.is_negative());
        prop_assert!(r.integrality.integral);
    }

    #[test]
    fn identity_map_has_nielsen_number_zero(seed in any::<u64>()) {
        let (tower, f) = Generator::new(seed).projection_input();
        let id = TowerMorphism::identity(f.chain().clone());
        let input = NValuedInput::new(InfraSpec::untwisted(tower), f.chain().clone(), vec![id], None).unwrap();
        prop_assert!(nvalued_nielsen(&input, BOUND).unwrap().value.is_zero());
    }
}
