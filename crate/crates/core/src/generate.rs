//! Seeded random inputs for property checks and benchmarks.
//!
//! Every family is built so that the data could come from an actual map:
//! branch matrices commute with the holonomy (or intertwine it the way the
//! flip of a Sol or Heisenberg-type tower requires), and rational branches
//! only occur as the `n` lifts of `x ↦ P^{-1}(D·x + t)` with `|det P| = n`.
//! Nothing is filtered on the outcome of the formulas.

use num_bigint::BigInt;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::{IntMat, RatMat};
use crate::morphism::{SublatticeChain, TowerMorphism};
use crate::nielsen::NValuedInput;
use crate::tower::{HolonomySpec, InfraSpec, TowerSpec};

/// The finite quotients used for holonomy.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Quotient {
    Cyclic(usize),
    Klein4,
}

impl Quotient {
    pub fn order(self) -> usize {
        match self {
            Quotient::Cyclic(m) => m,
            Quotient::Klein4 => 4,
        }
    }

    fn labels(self) -> Vec<String> {
        match self {
            Quotient::Cyclic(1) => vec!["e".into()],
            Quotient::Cyclic(m) => {
                let mut out = vec!["e".to_string(), "g".to_string()];
                out.extend((2..m).map(|k| format!("g{k}")));
                out
            }
            Quotient::Klein4 => vec!["e".into(), "a".into(), "b".into(), "ab".into()],
        }
    }

    fn table(self) -> Vec<Vec<usize>> {
        let n = self.order();
        (0..n)
            .map(|x| {
                (0..n)
                    .map(|y| match self {
                        Quotient::Cyclic(m) => (x + y) % m,
                        Quotient::Klein4 => x ^ y,
                    })
                    .collect()
            })
            .collect()
    }

    /// Irreducible integral blocks available for this quotient.
    fn blocks(self) -> Vec<Block> {
        match self {
            Quotient::Cyclic(1) => vec![Block::Trivial],
            Quotient::Cyclic(2) => vec![Block::Trivial, Block::Sign(1)],
            Quotient::Cyclic(3) => vec![Block::Trivial, Block::Rotation],
            Quotient::Cyclic(4) => vec![Block::Trivial, Block::Sign(1), Block::Rotation],
            Quotient::Klein4 => vec![Block::Trivial, Block::Sign(1), Block::Sign(2), Block::Sign(3)],
            Quotient::Cyclic(m) => panic!("no blocks for Z/{m}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Block {
    Trivial,
    /// A character of order 2; the mask selects it on Klein-four.
    Sign(usize),
    /// Order-3 or order-4 rotation of the plane.
    Rotation,
}

impl Block {
    fn dim(self) -> usize {
        if self == Block::Rotation {
            2
        } else {
            1
        }
    }

    fn generator(quotient: Quotient) -> IntMat {
        match quotient {
            Quotient::Cyclic(3) => IntMat::from_rows(&[vec![0, -1], vec![1, -1]]),
            _ => IntMat::from_rows(&[vec![0, -1], vec![1, 0]]),
        }
    }

    fn image(self, quotient: Quotient, q: usize) -> IntMat {
        match self {
            Block::Trivial => IntMat::identity(1),
            Block::Sign(mask) => {
                let odd = match quotient {
                    Quotient::Cyclic(_) => q % 2 == 1,
                    Quotient::Klein4 => (q & mask).count_ones() % 2 == 1,
                };
                IntMat::scalar(1, if odd { -1 } else { 1 })
            }
            Block::Rotation => Block::generator(quotient).pow(q as u64).expect("square"),
        }
    }
}

fn block_diag(blocks: &[IntMat]) -> IntMat {
    let n: usize = blocks.iter().map(IntMat::rows).sum();
    let mut out = IntMat::zeros(n, n);
    let mut at = 0;
    for b in blocks {
        for i in 0..b.rows() {
            for j in 0..b.cols() {
                out[(at + i, at + j)] = b[(i, j)].clone();
            }
        }
        at += b.rows();
    }
    out
}

pub struct Generator {
    rng: ChaCha8Rng,
}

impl Generator {
    pub fn new(seed: u64) -> Self {
        Generator { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    fn int(&mut self, lo: i64, hi: i64) -> BigInt {
        BigInt::from(self.rng.gen_range(lo..=hi))
    }

    pub fn matrix(&mut self, rows: usize, cols: usize, lo: i64, hi: i64) -> IntMat {
        let data = (0..rows * cols).map(|_| self.int(lo, hi)).collect();
        IntMat::new(rows, cols, data).expect("sized")
    }

    /// Product of random elementary matrices and sign changes.
    pub fn unimodular(&mut self, n: usize) -> IntMat {
        let mut u = IntMat::identity(n);
        if n < 2 {
            return if self.rng.gen_bool(0.5) { u } else { u.neg() };
        }
        for _ in 0..self.rng.gen_range(1..=4) {
            let i = self.rng.gen_range(0..n);
            let mut j = self.rng.gen_range(0..n - 1);
            if j >= i {
                j += 1;
            }
            let mut e = IntMat::identity(n);
            e[(i, j)] = self.int(-2, 2);
            u = u.mul(&e).expect("square");
        }
        if self.rng.gen_bool(0.3) {
            let i = self.rng.gen_range(0..n);
            let mut s = IntMat::identity(n);
            s[(i, i)] = BigInt::from(-1);
            u = u.mul(&s).expect("square");
        }
        u
    }

    /// Upper-triangular with diagonal in `1..=3`.
    fn chain_basis(&mut self, n: usize) -> IntMat {
        let mut b = IntMat::zeros(n, n);
        for i in 0..n {
            b[(i, i)] = self.int(1, 3);
            for j in i + 1..n {
                b[(i, j)] = self.int(-2, 2);
            }
        }
        b
    }

    fn chain(&mut self, ranks: &[usize]) -> SublatticeChain {
        match self.rng.gen_range(0..3) {
            0 => SublatticeChain::identity(ranks),
            1 => SublatticeChain::identity(ranks).scaled(self.rng.gen_range(2..=3)),
            _ => SublatticeChain::new(ranks.iter().map(|&k| self.chain_basis(k)).collect()).expect("nonsingular"),
        }
    }

    /// Square matrices of a common size `k ≤ 3` with entries in `[-3, 3]`.
    pub fn torus_pair(&mut self) -> (IntMat, IntMat) {
        let k = self.rng.gen_range(1..=3);
        (self.matrix(k, k, -3, 3), self.matrix(k, k, -3, 3))
    }

    fn quotient(&mut self) -> Quotient {
        *[Quotient::Cyclic(1), Quotient::Cyclic(2), Quotient::Cyclic(3), Quotient::Cyclic(4), Quotient::Klein4]
            .choose(&mut self.rng)
            .expect("nonempty")
    }

    /// A block decomposition of `Z^k` for `quotient`.
    fn blocks(&mut self, quotient: Quotient, k: usize) -> Vec<Block> {
        let available = quotient.blocks();
        let mut out = vec![];
        let mut left = k;
        while left > 0 {
            let fitting: Vec<Block> = available.iter().copied().filter(|b| b.dim() <= left).collect();
            let b = *fitting.choose(&mut self.rng).expect("trivial block fits");
            left -= b.dim();
            out.push(b);
        }
        out
    }

    /// An integer matrix commuting with every block-diagonal image.
    fn commutant(&mut self, quotient: Quotient, blocks: &[Block]) -> IntMat {
        let offsets: Vec<usize> = blocks
            .iter()
            .scan(0, |at, b| {
                let here = *at;
                *at += b.dim();
                Some(here)
            })
            .collect();
        let n: usize = blocks.iter().map(|b| b.dim()).sum();
        let mut f = IntMat::zeros(n, n);
        for (r, br) in blocks.iter().enumerate() {
            for (s, bs) in blocks.iter().enumerate() {
                if br != bs {
                    continue;
                }
                if *br == Block::Rotation {
                    if r != s {
                        continue;
                    }
                    let g = Block::generator(quotient);
                    let blk = IntMat::scalar(2, self.int(-2, 2)).add(&g.scale(&self.int(-2, 2))).expect("2x2");
                    for i in 0..2 {
                        for j in 0..2 {
                            f[(offsets[r] + i, offsets[r] + j)] = blk[(i, j)].clone();
                        }
                    }
                } else {
                    f[(offsets[r], offsets[s])] = self.int(-3, 3);
                }
            }
        }
        f
    }

    /// Split torus levels (trivial `μ`) with holonomy acting through blocks
    /// and branches in the commutant.
    fn split_family(&mut self, n: usize, quotient: Quotient) -> NValuedInput {
        let c = self.rng.gen_range(0..=2);
        let ranks: Vec<usize> = (0..=c).map(|_| self.rng.gen_range(1..=3)).collect();
        let k0 = ranks[0];
        let blocks: Vec<Vec<Block>> = ranks.iter().map(|&k| self.blocks(quotient, k)).collect();
        let tower = TowerSpec::new(
            ranks.clone(),
            ranks[1..].iter().map(|&k| vec![IntMat::identity(k); k0]).collect(),
        )
        .expect("shapes");
        let matrices = (0..quotient.order())
            .map(|q| {
                blocks
                    .iter()
                    .map(|bs| block_diag(&bs.iter().map(|b| b.image(quotient, q)).collect::<Vec<_>>()))
                    .collect()
            })
            .collect();
        let holonomy = HolonomySpec::new(quotient.labels(), 0, quotient.table(), matrices).expect("group");
        let infra = InfraSpec::new(tower, holonomy).expect("shapes");
        let chain = self.chain(&ranks);
        let branches = (0..n)
            .map(|_| {
                let fs = blocks.iter().map(|bs| self.commutant(quotient, bs)).collect();
                TowerMorphism::from_integer(chain.clone(), fs).expect("shapes")
            })
            .collect();
        NValuedInput::new(infra, chain, branches, None).expect("generated input is valid")
    }

    /// Unipotent action `U = [[1,1],[0,1]]` of `Z` (optionally `Z^2`, the
    /// second generator acting trivially) with optional flip holonomy.
    fn heisenberg_family(&mut self, n: usize, flip: bool) -> NValuedInput {
        let u = IntMat::from_rows(&[vec![1, 1], vec![0, 1]]);
        let k0 = self.rng.gen_range(1..=2);
        let with_centre = k0 == 1 && self.rng.gen_bool(0.5);
        let mut ranks = vec![k0, 2];
        let mut actions = vec![if k0 == 1 { vec![u.clone()] } else { vec![u.clone(), IntMat::identity(2)] }];
        if with_centre {
            ranks.push(1);
            actions.push(vec![IntMat::identity(1)]);
        }
        let tower = TowerSpec::new(ranks.clone(), actions).expect("shapes");
        let eps = if self.rng.gen_bool(0.5) { 1 } else { -1 };
        let flip_base = if k0 == 1 { IntMat::scalar(1, -1) } else { IntMat::diag(&[-1, eps]) };
        let holonomy = if flip {
            let mut b = vec![flip_base, IntMat::diag(&[-1, 1])];
            if with_centre {
                b.push(IntMat::scalar(1, if self.rng.gen_bool(0.5) { 1 } else { -1 }));
            }
            HolonomySpec::new(
                vec!["e".into(), "b".into()],
                0,
                vec![vec![0, 1], vec![1, 0]],
                vec![ranks.iter().map(|&k| IntMat::identity(k)).collect(), b],
            )
            .expect("group")
        } else {
            HolonomySpec::trivial(&ranks)
        };
        let infra = InfraSpec::new(tower, holonomy).expect("shapes");
        let chain = self.chain(&ranks);
        let branches = (0..n)
            .map(|_| {
                let m = self.int(-3, 3);
                let f0 = if k0 == 1 {
                    IntMat::scalar(1, m.clone())
                } else {
                    // (F_0 v)_1 = m·v_1 keeps μ(F_0 v) a power of U
                    let gamma = if flip && eps == 1 { BigInt::from(0) } else { self.int(-3, 3) };
                    IntMat::try_from_rows(vec![vec![m.clone(), 0.into()], vec![gamma, self.int(-3, 3)]]).expect("2x2")
                };
                let (a, b) = (self.int(-2, 2), self.int(-2, 2));
                let f1 = IntMat::try_from_rows(vec![vec![&m * &a, &m * &b], vec![0.into(), a]]).expect("2x2");
                let mut fs = vec![f0, f1];
                if with_centre {
                    fs.push(IntMat::scalar(1, self.int(-3, 3)));
                }
                TowerMorphism::from_integer(chain.clone(), fs).expect("shapes")
            })
            .collect();
        NValuedInput::new(infra, chain, branches, None).expect("generated input is valid")
    }

    /// `M = [[2,1],[1,1]]` over the circle, optionally with the flip
    /// `X = [[1,0],[-1,-1]]`, `X·M·X^{-1} = M^{-1}`.
    fn sol_family(&mut self, n: usize, flip: bool) -> NValuedInput {
        let m = IntMat::from_rows(&[vec![2, 1], vec![1, 1]]);
        let x = IntMat::from_rows(&[vec![1, 0], vec![-1, -1]]);
        let tower = TowerSpec::new(vec![1, 2], vec![vec![m.clone()]]).expect("shapes");
        let holonomy = if flip {
            HolonomySpec::new(
                vec!["e".into(), "b".into()],
                0,
                vec![vec![0, 1], vec![1, 0]],
                vec![vec![IntMat::identity(1), IntMat::identity(2)], vec![IntMat::scalar(1, -1), x.clone()]],
            )
            .expect("group")
        } else {
            HolonomySpec::trivial(&[1, 2])
        };
        let infra = InfraSpec::new(tower, holonomy).expect("shapes");
        let chain = self.chain(&[1, 2]);
        let branches = (0..n)
            .map(|_| {
                let d: i64 = self.rng.gen_range(-3..=3);
                let poly = IntMat::scalar(2, self.int(-2, 2)).add(&m.scale(&self.int(-2, 2))).expect("2x2");
                let f1 = match d {
                    1 => poly,
                    -1 => x.mul(&poly).expect("2x2"),
                    _ => IntMat::zeros(2, 2),
                };
                TowerMorphism::from_integer(chain.clone(), vec![IntMat::scalar(1, d), f1]).expect("shapes")
            })
            .collect();
        NValuedInput::new(infra, chain, branches, None).expect("generated input is valid")
    }

    /// The `n = |det P|` lifts of `x ↦ P^{-1}(D·x + t)` on one level of a
    /// split torus, integer maps on the others.
    fn root_family(&mut self) -> NValuedInput {
        let n = self.rng.gen_range(2..=3);
        let c = self.rng.gen_range(0..=1);
        let ranks: Vec<usize> = (0..=c).map(|_| self.rng.gen_range(1..=3)).collect();
        let level = self.rng.gen_range(0..=c);
        let k = ranks[level];
        let mut p = IntMat::identity(k);
        p[(0, 0)] = BigInt::from(n);
        let p = self.unimodular(k).mul(&p).and_then(|p| p.mul(&self.unimodular(k))).expect("square");
        let p_inv = p.to_rat().inverse().expect("nonsingular");
        let fs: Vec<RatMat> = ranks
            .iter()
            .enumerate()
            .map(|(i, &ki)| {
                let d = self.matrix(ki, ki, -3, 3);
                if i == level {
                    p_inv.mul_int(&d).expect("square")
                } else {
                    d.to_rat()
                }
            })
            .collect();
        let bases = ranks
            .iter()
            .enumerate()
            .map(|(i, &ki)| if i == level { IntMat::scalar(ki, n as i64) } else { IntMat::identity(ki) })
            .collect();
        let chain = SublatticeChain::new(bases).expect("nonsingular");
        let tower = TowerSpec::new(
            ranks.clone(),
            ranks[1..].iter().map(|&ki| vec![IntMat::identity(ki); ranks[0]]).collect(),
        )
        .expect("shapes");
        let f = TowerMorphism::new(chain.clone(), fs).expect("shapes");
        NValuedInput::new(InfraSpec::untwisted(tower), chain, vec![f; n], None).expect("generated input is valid")
    }

    /// Single-valued map on a nilmanifold-type tower, trivial holonomy.
    pub fn nilpotent_single(&mut self) -> NValuedInput {
        if self.rng.gen_bool(0.5) {
            self.heisenberg_family(1, false)
        } else {
            self.split_family(1, Quotient::Cyclic(1))
        }
    }

    /// A tower with one valid morphism on a random chain.
    pub fn projection_input(&mut self) -> (TowerSpec, TowerMorphism) {
        let input = match self.rng.gen_range(0..4) {
            0 => self.split_family(1, Quotient::Cyclic(1)),
            1 => self.heisenberg_family(1, false),
            2 => self.sol_family(1, false),
            _ => self.root_family(),
        };
        let f = input.branches[0].clone();
        (input.infra.tower, f)
    }

    /// An n-valued input with `|Q| ≤ 4`, `n ≤ 3`, `k_i ≤ 3`, `c ≤ 2`.
    pub fn nvalued(&mut self) -> NValuedInput {
        let n = self.rng.gen_range(1..=3);
        match self.rng.gen_range(0..8) {
            0..=3 => {
                let q = self.quotient();
                self.split_family(n, q)
            }
            4 => {
                let flip = self.rng.gen_bool(0.5);
                self.heisenberg_family(n, flip)
            }
            5 => {
                let flip = self.rng.gen_bool(0.5);
                self.sol_family(n, flip)
            }
            _ => self.root_family(),
        }
    }
}
