//! Acceptance suite. Every criterion is exact; each prints one PASS/FAIL line
//! and the process fails if any criterion does.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use nielsen_cli::{parse_spec, ProblemFile};
use nielsen_core::generate::Generator;
use nielsen_core::linalg::{det_int, IntMat, RatMat};
use nielsen_core::morphism::{index_product, restriction_invariance_check, TowerMorphism};
use nielsen_core::nielsen::{
    independence_certificate, nvalued_nielsen, projection_coincidence, torus_coincidence, Independence, NValuedInput,
};
use nielsen_core::oracle::{
    affine_torus_coincidences, averaging_crosscheck, coincidence_factor_orders, reidemeister_order, PointCount,
    ReidemeisterOrder,
};
use nielsen_core::tower::{netness_check, Certificate, InfraSpec, LevelStatus, TowerSpec, DEFAULT_BOX_BOUND};

const BOUND: u32 = DEFAULT_BOX_BOUND;

const SHIPPED: &[(&str, &str)] = &[
    ("torus", include_str!("../examples/torus.nielsen")),
    ("circle-degree-3", include_str!("../examples/circle-degree-3.nielsen")),
    ("circle-square-root", include_str!("../examples/circle-square-root.nielsen")),
    ("klein-bottle", include_str!("../examples/klein-bottle.nielsen")),
    ("heisenberg", include_str!("../examples/heisenberg.nielsen")),
    ("heisenberg-flip", include_str!("../examples/heisenberg-flip.nielsen")),
    ("sol", include_str!("../examples/sol.nielsen")),
    ("sol-sublattice", include_str!("../examples/sol-sublattice.nielsen")),
    ("sol-flip", include_str!("../examples/sol-flip.nielsen")),
    ("two-valued-torus", include_str!("../examples/two-valued-torus.nielsen")),
];

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn shipped(name: &str) -> ProblemFile {
    let (_, text) = SHIPPED.iter().find(|(n, _)| *n == name).expect("shipped example");
    parse_spec(text).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn all_shipped() -> Vec<(&'static str, ProblemFile)> {
    SHIPPED.iter().map(|(n, _)| (*n, shipped(n))).collect()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn int(x: i64) -> BigInt {
    BigInt::from(x)
}

fn rat(x: &BigInt) -> BigRational {
    BigRational::from_integer(x.clone())
}

fn finite(o: &ReidemeisterOrder) -> BigInt {
    o.finite().cloned().unwrap_or_else(BigInt::zero)
}

/// `Π |det(I − F_i)|` through cokernel orders: `|coker(B_i − F_i·B_i)| / |det B_i|`.
fn cokernel_product(f: &TowerMorphism) -> Result<BigRational, String> {
    let ids: Vec<RatMat> = f.matrices().iter().map(|m| RatMat::identity(m.rows())).collect();
    let orders = coincidence_factor_orders(f.matrices(), &ids, f.chain().bases()).map_err(|e| e.to_string())?;
    let mut p = BigRational::one();
    for (o, b) in orders.iter().zip(f.chain().bases()) {
        let d = det_int(b).map_err(|e| e.to_string())?.abs();
        p *= BigRational::new(finite(o), d);
    }
    Ok(p)
}

fn torus_formula_vs_oracle() -> Outcome {
    let start = Instant::now();
    let mut gen = Generator::new(0x7021);
    let (mut compared, mut degenerate) = (0, 0);
    for case in 0..200 {
        let (f, g) = gen.torus_pair();
        let k = f.rows();
        let b_f: Vec<BigRational> = gen.matrix(1, k, -3, 3).entries().iter().map(|x| BigRational::new(x.clone(), int(5))).collect();
        let b_g: Vec<BigRational> = gen.matrix(1, k, -3, 3).entries().iter().map(|x| BigRational::new(x.clone(), int(7))).collect();
        let d = det_int(&g.sub(&f).unwrap()).unwrap();
        let points = affine_torus_coincidences(&f, &g, &b_f, &b_g).map_err(|e| e.to_string())?;
        if d.is_zero() {
            degenerate += 1;
            // Either a positive-dimensional solution set or, off the image, none.
            ensure(matches!(&points, PointCount::Degenerate) || points == PointCount::Finite(BigInt::zero()), || {
                format!("case {case}: singular G-F but oracle gave {points:?}")
            })?;
            continue;
        }
        let formula = torus_coincidence(&f, &g).map_err(|e| e.to_string())?;
        ensure(points == PointCount::Finite(formula.clone()), || {
            format!("case {case}: F = {f:?}, G = {g:?}: formula {formula}, oracle {points:?}")
        })?;
        compared += 1;
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(5), || format!("took {elapsed:?}"))?;
    Ok(format!("{compared} pairs agree, {degenerate} singular skipped, {elapsed:.2?}"))
}

fn nilmanifold_product() -> Outcome {
    let file = shipped("heisenberg");
    let input = file.nvalued_input().map_err(|e| e.to_string())?;
    let value = nvalued_nielsen(&input, BOUND).map_err(|e| e.to_string())?.value;
    let mut expected = BigInt::one();
    for m in input.branches[0].matrices() {
        let f = m.to_int().expect("integral");
        expected *= finite(&reidemeister_order(&IntMat::identity(f.rows()).sub(&f).unwrap()).unwrap());
    }
    ensure(value == expected && value == int(10), || format!("heisenberg: {value} vs {expected}"))?;

    let mut gen = Generator::new(0x2112);
    for case in 0..50 {
        let input = gen.nilpotent_single();
        ensure(input.n() == 1 && input.infra.holonomy.is_trivial(), || format!("case {case}: not single-valued"))?;
        let value = nvalued_nielsen(&input, BOUND).map_err(|e| format!("case {case}: {e}"))?.value;
        let expected = cokernel_product(&input.branches[0])?;
        ensure(rat(&value) == expected, || format!("case {case}: {value} vs {expected}"))?;
    }
    Ok("heisenberg = 10 and 50 random towers match the cokernel product".into())
}

fn sol_example() -> Outcome {
    let m = IntMat::from_rows(&[vec![2, 1], vec![1, 1]]);
    let x = IntMat::from_rows(&[vec![0, 1], vec![-1, 0]]);
    let m_inv = m.inverse_unimodular().expect("unimodular");
    ensure(x.mul(&m).unwrap() == m_inv.mul(&x).unwrap(), || "X M != M^-1 X".into())?;

    let mut values = vec![];
    for (name, expected) in [("sol", 4), ("sol-sublattice", 8)] {
        let file = shipped(name);
        let f = file.branch(0).expect("branch 1");
        ensure(f.matrix(1).to_int().as_ref() == Some(&x), || format!("{name}: F_1 is not X"))?;
        let p = projection_coincidence(&file.tower, &f, BOUND).map_err(|e| e.to_string())?;
        ensure(p.value == int(expected) && p.paths_agree, || format!("{name}: {} (paths agree: {})", p.value, p.paths_agree))?;
        let cross = cokernel_product(&f)? * rat(&p.index);
        ensure(cross == rat(&p.value), || format!("{name}: cokernel route gives {cross}"))?;

        let verdict = netness_check(&file.tower, BOUND).map_err(|e| e.to_string())?;
        ensure(verdict.overall() == LevelStatus::Net, || format!("{name}: netness {}", verdict.overall()))?;
        ensure(verdict.levels.iter().all(|l| l.certificate == Certificate::PositiveRealSpectrum), || {
            format!("{name}: certificates {:?}", verdict.levels)
        })?;
        let ind = independence_certificate(&file.tower, &f, BOUND).map_err(|e| e.to_string())?;
        ensure(ind == Independence::Certified, || format!("{name}: independence {ind:?}"))?;
        values.push(p.value);
    }
    Ok(format!("projection {} and {}, Net by positive real spectrum, independence certified", values[0], values[1]))
}

fn klein_bottle() -> Outcome {
    let file = shipped("klein-bottle");
    let input = file.nvalued_input().map_err(|e| e.to_string())?;
    let report = nvalued_nielsen(&input, BOUND).map_err(|e| e.to_string())?;
    ensure(report.value == int(4), || format!("value {}", report.value))?;
    let f = input.branches[0].matrix(0).to_int().expect("integral");
    for t in &report.terms {
        let q = input.infra.holonomy.index_of(&t.label).expect("label");
        let a = input.infra.holonomy.matrix(q, 0);
        let order = reidemeister_order(&IntMat::identity(2).sub(&a.mul(&f).unwrap()).unwrap()).unwrap();
        ensure(t.product == rat(&finite(&order)), || format!("term {}: {} vs coker {order}", t.label, t.product))?;
    }

    let id = TowerMorphism::identity(input.chain.clone());
    let identity = NValuedInput::new(input.infra.clone(), input.chain.clone(), vec![id], None).map_err(|e| e.to_string())?;
    let zero = nvalued_nielsen(&identity, BOUND).map_err(|e| e.to_string())?.value;
    ensure(zero.is_zero(), || format!("identity gives {zero}"))?;
    Ok("diag(2, 3) gives 4 with terms matching cokernel orders, identity gives 0".into())
}

fn integrality() -> Outcome {
    let mut gen = Generator::new(0x1a7e);
    let mut nonzero = 0;
    for case in 0..100 {
        let input = gen.nvalued();
        let ranks = input.infra.tower.ranks();
        ensure(
            input.infra.holonomy.order() <= 4 && input.n() <= 3 && ranks.iter().all(|&k| k <= 3) && ranks.len() <= 3,
            || format!("case {case}: outside the size limits"),
        )?;
        let r = nvalued_nielsen(&input, BOUND).map_err(|e| format!("case {case}: {e}"))?;
        let q = BigRational::from_integer(int(r.integrality.divisor as i64));
        ensure(r.integrality.integral && (&r.integrality.raw_sum / q).is_integer(), || {
            format!("case {case}: raw sum {} over {}", r.integrality.raw_sum, r.integrality.divisor)
        })?;
        if !r.value.is_zero() {
            nonzero += 1;
        }
    }
    Ok(format!("100 raw sums divisible by |Q| ({nonzero} nonzero values)"))
}

fn representative_invariance() -> Outcome {
    let mut perturbations = 0usize;
    for (name, file) in all_shipped() {
        let input = file.nvalued_input().map_err(|e| e.to_string())?;
        let tower = &input.infra.tower;
        if !netness_check(tower, BOUND).map_err(|e| e.to_string())?.is_net() {
            continue;
        }
        let base = nvalued_nielsen(&input, BOUND).map_err(|e| e.to_string())?;
        let holonomy = &input.infra.holonomy;
        // The identity label keeps A_i(e) = I.
        for q in (0..holonomy.order()).filter(|&q| q != holonomy.identity()) {
            for level in 1..=tower.depth() {
                for v in tower.box_vectors(3) {
                    let mu = tower.mu(level, &v).unwrap();
                    let moved = holonomy.with_matrix(q, level, mu.mul(holonomy.matrix(q, level)).unwrap());
                    let infra = InfraSpec::new(tower.clone(), moved).map_err(|e| format!("{name}: {e}"))?;
                    let perturbed = NValuedInput { infra, ..input.clone() };
                    let r = nvalued_nielsen(&perturbed, BOUND).map_err(|e| format!("{name}: {e}"))?;
                    for (a, b) in base.terms.iter().zip(&r.terms) {
                        let kept = if a.level_factors[0].is_zero() { b.product.is_zero() } else { a.product == b.product };
                        ensure(kept, || {
                            format!("{name}: label {} level {level} v {v:?}: {} became {}", a.label, a.product, b.product)
                        })?;
                    }
                    perturbations += 1;
                }
            }
        }
    }
    Ok(format!("{perturbations} perturbations over the shipped examples leave every term unchanged"))
}

fn two_paths() -> Outcome {
    let mut gen = Generator::new(0x7a75);
    for case in 0..100 {
        let (tower, f) = gen.projection_input();
        let p = projection_coincidence(&tower, &f, BOUND).map_err(|e| format!("case {case}: {e}"))?;
        let index = index_product(f.chain()).unwrap();
        ensure(p.paths_agree && p.value == p.coincidence_value && p.index == index, || {
            format!("case {case}: {} vs {} (index {} vs {index})", p.value, p.coincidence_value, p.index)
        })?;
    }
    Ok("100 random inputs agree on both paths".into())
}

fn restriction_invariance() -> Outcome {
    let mut checked = 0;
    for (name, file) in all_shipped() {
        let chain = file.chain_or_identity();
        for j in 0..file.branches.len() {
            let f = file.branch(j).expect("branch");
            for s in [2, 3] {
                let ok = restriction_invariance_check(&f, &chain.scaled(s)).map_err(|e| format!("{name}: {e}"))?;
                ensure(ok, || format!("{name} branch {} x{s}", j + 1))?;
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} scalar refinements of shipped chains"))
}

fn averaging() -> Outcome {
    let start = Instant::now();
    let mut inputs: Vec<(String, NValuedInput)> = vec![];
    for (name, file) in all_shipped() {
        inputs.push((name.into(), file.nvalued_input().map_err(|e| e.to_string())?));
    }
    let mut gen = Generator::new(0xa7e5);
    for case in 0..100 {
        inputs.push((format!("random {case}"), gen.nvalued()));
    }
    for (name, input) in &inputs {
        let value = nvalued_nielsen(input, BOUND).map_err(|e| format!("{name}: {e}"))?.value;
        let c = averaging_crosscheck(input, BOUND).map_err(|e| format!("{name}: {e}"))?;
        ensure(c.agree && c.recomputed == rat(&value) && c.nielsen == value, || {
            format!("{name}: {value} vs recomputed {}", c.recomputed)
        })?;
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(30), || format!("took {elapsed:?}"))?;
    Ok(format!("{} inputs agree, {elapsed:.2?}", inputs.len()))
}

fn netness_verdicts() -> Outcome {
    let tower = |rows: &[Vec<i64>]| TowerSpec::new(vec![1, 2], vec![vec![IntMat::from_rows(rows)]]).unwrap();
    let rot = netness_check(&tower(&[vec![0, -1], vec![1, 0]]), BOUND).map_err(|e| e.to_string())?;
    ensure(rot.overall() == LevelStatus::NotNr, || format!("rotation: {}", rot.overall()))?;
    ensure(rot.witness().map(|w| w.2) == Some(4), || format!("rotation witness {:?}", rot.witness()))?;
    let uni = netness_check(&tower(&[vec![1, 1], vec![0, 1]]), BOUND).map_err(|e| e.to_string())?;
    ensure(uni.is_net() && uni.levels[0].certificate == Certificate::Unipotent, || format!("unipotent: {:?}", uni.levels))?;
    let hyp = netness_check(&tower(&[vec![2, 1], vec![1, 1]]), BOUND).map_err(|e| e.to_string())?;
    ensure(hyp.is_net() && hyp.levels[0].certificate == Certificate::PositiveRealSpectrum, || {
        format!("hyperbolic: {:?}", hyp.levels)
    })?;
    Ok("rotation NotNR (order 4), shear Net (unipotent), hyperbolic Net (positive real spectrum)".into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("torus formula vs affine oracle", torus_formula_vs_oracle),
        ("nilmanifold product formula", nilmanifold_product),
        ("Sol worked example", sol_example),
        ("Klein bottle averaging", klein_bottle),
        ("integrality of the average", integrality),
        ("representative invariance", representative_invariance),
        ("two-path projection identity", two_paths),
        ("restriction invariance", restriction_invariance),
        ("averaging crosscheck", averaging),
        ("netness verdicts", netness_verdicts),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or(p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        match outcome {
            Ok(detail) => println!("PASS  {:>2}  {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {:>2}  {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
