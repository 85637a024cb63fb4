//! Dense tensors over an 8-dimensional index space.
//!
//! Components are stored row-major: the last slot varies fastest.
//! Index position carries no up/down information; raising and lowering
//! go through an explicit [`Metric`].

use crate::metric::Metric;
use crate::perm::permutations;
use crate::{Mat8, DIM};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum TensorError {
    #[error("slot {slot} out of range for rank {rank}")]
    SlotOutOfRange { slot: usize, rank: usize },
    #[error("slot {0} used twice")]
    DuplicateSlot(usize),
    #[error("expected {expected} components, got {got}")]
    Length { expected: usize, got: usize },
    #[error("rank mismatch: {0} vs {1}")]
    RankMismatch(usize, usize),
    #[error("rank {0} exceeds the supported maximum of 8")]
    RankTooLarge(usize),
    #[error("malformed einsum spec `{0}`")]
    Spec(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Tensor {
    rank: usize,
    data: Vec<f64>,
}

pub(crate) fn pow8(k: usize) -> usize {
    1usize << (3 * k)
}

impl Tensor {
    pub fn zeros(rank: usize) -> Self {
        assert!(rank <= 8, "rank {rank} > 8");
        Tensor { rank, data: vec![0.0; pow8(rank)] }
    }

    pub fn scalar(v: f64) -> Self {
        Tensor { rank: 0, data: vec![v] }
    }

    pub fn from_vec(rank: usize, data: Vec<f64>) -> Result<Self, TensorError> {
        if rank > 8 {
            return Err(TensorError::RankTooLarge(rank));
        }
        if data.len() != pow8(rank) {
            return Err(TensorError::Length { expected: pow8(rank), got: data.len() });
        }
        Ok(Tensor { rank, data })
    }

    pub fn from_fn(rank: usize, mut f: impl FnMut(&[usize]) -> f64) -> Self {
        let mut t = Tensor::zeros(rank);
        let mut idx = vec![0usize; rank];
        for off in 0..t.data.len() {
            decode(off, &mut idx);
            t.data[off] = f(&idx);
        }
        t
    }

    pub fn from_mat(m: &Mat8) -> Self {
        Tensor::from_fn(2, |i| m[(i[0], i[1])])
    }

    pub fn to_mat(&self) -> Mat8 {
        assert_eq!(self.rank, 2);
        Mat8::from_fn(|i, j| self.data[i * DIM + j])
    }

    /// Kronecker delta as a rank-2 tensor.
    pub fn delta() -> Self {
        Tensor::from_mat(&Mat8::identity())
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn offset(idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &i| acc * DIM + i)
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        debug_assert_eq!(idx.len(), self.rank);
        self.data[Self::offset(idx)]
    }

    pub fn set(&mut self, idx: &[usize], v: f64) {
        debug_assert_eq!(idx.len(), self.rank);
        self.data[Self::offset(idx)] = v;
    }

    pub fn add_at(&mut self, idx: &[usize], v: f64) {
        self.data[Self::offset(idx)] += v;
    }

    pub fn scale(&self, s: f64) -> Tensor {
        Tensor { rank: self.rank, data: self.data.iter().map(|x| x * s).collect() }
    }

    pub fn scale_mut(&mut self, s: f64) {
        self.data.iter_mut().for_each(|x| *x *= s);
    }

    /// `self += s * other`
    pub fn axpy(&mut self, s: f64, other: &Tensor) {
        assert_eq!(self.rank, other.rank, "rank mismatch in axpy");
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
    }

    pub fn add(&self, other: &Tensor) -> Tensor {
        let mut out = self.clone();
        out.axpy(1.0, other);
        out
    }

    pub fn sub(&self, other: &Tensor) -> Tensor {
        let mut out = self.clone();
        out.axpy(-1.0, other);
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }

    /// Full contraction with Euclidean index placement: sum of products of all components.
    pub fn dot(&self, other: &Tensor) -> f64 {
        assert_eq!(self.rank, other.rank);
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    /// Reorders slots: slot `s` of the result is slot `axes[s]` of `self`.
    pub fn permute(&self, axes: &[usize]) -> Tensor {
        assert_eq!(axes.len(), self.rank);
        let r = self.rank;
        let mut strides = vec![0usize; r];
        for (s, &a) in axes.iter().enumerate() {
            strides[s] = pow8(r - 1 - a);
        }
        let mut out = Tensor::zeros(r);
        let mut idx = vec![0usize; r];
        for off in 0..out.data.len() {
            decode(off, &mut idx);
            let src: usize = idx.iter().zip(&strides).map(|(i, s)| i * s).sum();
            out.data[off] = self.data[src];
        }
        out
    }

    fn check_slots(&self, slots: &[usize]) -> Result<(), TensorError> {
        for (n, &s) in slots.iter().enumerate() {
            if s >= self.rank {
                return Err(TensorError::SlotOutOfRange { slot: s, rank: self.rank });
            }
            if slots[..n].contains(&s) {
                return Err(TensorError::DuplicateSlot(s));
            }
        }
        Ok(())
    }

    fn sym_impl(&self, slots: &[usize], signed: bool) -> Result<Tensor, TensorError> {
        self.check_slots(slots)?;
        let k = slots.len();
        let perms = permutations(k);
        let mut out = Tensor::zeros(self.rank);
        let mut axes: Vec<usize> = (0..self.rank).collect();
        for p in perms {
            for (m, &s) in slots.iter().enumerate() {
                axes[s] = slots[p.perm[m]];
            }
            let w = if signed { p.sign } else { 1.0 };
            out.axpy(w, &self.permute(&axes));
        }
        out.scale_mut(1.0 / perms.len() as f64);
        Ok(out)
    }

    /// Weight-one antisymmetrisation over the given slots.
    pub fn antisymmetrize(&self, slots: &[usize]) -> Result<Tensor, TensorError> {
        self.sym_impl(slots, true)
    }

    /// Weight-one symmetrisation over the given slots.
    pub fn symmetrize(&self, slots: &[usize]) -> Result<Tensor, TensorError> {
        self.sym_impl(slots, false)
    }

    /// Antisymmetrise over every slot.
    pub fn alt(&self) -> Tensor {
        let all: Vec<usize> = (0..self.rank).collect();
        self.antisymmetrize(&all).expect("all slots valid")
    }

    /// `out_{..a..} = m[a][p] self_{..p..}` on one slot.
    pub fn apply_slot(&self, slot: usize, m: &Mat8) -> Tensor {
        assert!(slot < self.rank);
        let stride = pow8(self.rank - 1 - slot);
        let mut out = Tensor::zeros(self.rank);
        let block = stride * DIM;
        for base in (0..self.data.len()).step_by(block) {
            for inner in 0..stride {
                for a in 0..DIM {
                    let mut acc = 0.0;
                    for p in 0..DIM {
                        acc += m[(a, p)] * self.data[base + p * stride + inner];
                    }
                    out.data[base + a * stride + inner] = acc;
                }
            }
        }
        out
    }

    /// Apply `m` to every slot (the GL(8) action on covariant tensors).
    pub fn act(&self, m: &Mat8) -> Tensor {
        let mut t = self.clone();
        for s in 0..self.rank {
            t = t.apply_slot(s, m);
        }
        t
    }

    /// Derivation action: sum over slots of `m` applied to that slot alone.
    pub fn derivation(&self, m: &Mat8) -> Tensor {
        let mut out = Tensor::zeros(self.rank);
        for s in 0..self.rank {
            out.axpy(1.0, &self.apply_slot(s, m));
        }
        out
    }

    /// Raise every slot with `g^{-1}`.
    pub fn raise_all(&self, metric: &Metric) -> Tensor {
        self.act(metric.g_inv())
    }
}

pub(crate) fn decode(mut off: usize, idx: &mut [usize]) {
    for s in (0..idx.len()).rev() {
        idx[s] = off % DIM;
        off /= DIM;
    }
}

/// Contract `a` and `b` over the listed slot pairs. With a metric, each pair
/// is contracted through `g^{-1}` (both slots treated as lower indices).
/// Remaining slots of `a` come first, then those of `b`, in order.
pub fn contract(
    a: &Tensor,
    b: &Tensor,
    pairs: &[(usize, usize)],
    metric: Option<&Metric>,
) -> Result<Tensor, TensorError> {
    let sa: Vec<usize> = pairs.iter().map(|p| p.0).collect();
    let sb: Vec<usize> = pairs.iter().map(|p| p.1).collect();
    a.check_slots(&sa)?;
    b.check_slots(&sb)?;
    let mut a = a.clone();
    if let Some(m) = metric {
        for &s in &sa {
            a = a.apply_slot(s, m.g_inv());
        }
    }
    // Build an einsum over generated letters.
    let letters: Vec<char> = ('a'..='z').chain('A'..='Z').collect();
    let mut la = vec![' '; a.rank()];
    let mut lb = vec![' '; b.rank()];
    let mut next = 0;
    for &(x, y) in pairs {
        la[x] = letters[next];
        lb[y] = letters[next];
        next += 1;
    }
    let mut out = String::new();
    for l in la.iter_mut().chain(lb.iter_mut()) {
        if *l == ' ' {
            *l = letters[next];
            out.push(letters[next]);
            next += 1;
        }
    }
    let spec = format!(
        "{},{}->{}",
        la.iter().collect::<String>(),
        lb.iter().collect::<String>(),
        out
    );
    try_einsum(&spec, &[&a, b])
}

struct Operand {
    letters: Vec<char>,
    t: Tensor,
}

fn stride_of(letters: &[char], c: char) -> usize {
    match letters.iter().position(|&x| x == c) {
        Some(p) => pow8(letters.len() - 1 - p),
        None => 0,
    }
}

fn offsets(letters: &[char], strides_a: &[usize], strides_b: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let n = pow8(letters.len());
    let mut oa = vec![0usize; n];
    let mut ob = vec![0usize; n];
    let mut idx = vec![0usize; letters.len()];
    for off in 0..n {
        decode(off, &mut idx);
        oa[off] = idx.iter().zip(strides_a).map(|(i, s)| i * s).sum();
        ob[off] = idx.iter().zip(strides_b).map(|(i, s)| i * s).sum();
    }
    (oa, ob)
}

/// Collapse repeated letters within one operand (diagonal), keeping first occurrences.
fn take_diagonal(op: Operand) -> Operand {
    let mut uniq: Vec<char> = Vec::new();
    for &c in &op.letters {
        if !uniq.contains(&c) {
            uniq.push(c);
        }
    }
    if uniq.len() == op.letters.len() {
        return op;
    }
    let r = op.letters.len();
    let src_strides: Vec<usize> = uniq
        .iter()
        .map(|&c| {
            op.letters
                .iter()
                .enumerate()
                .filter(|(_, &x)| x == c)
                .map(|(p, _)| pow8(r - 1 - p))
                .sum()
        })
        .collect();
    let mut out = Tensor::zeros(uniq.len());
    let mut idx = vec![0usize; uniq.len()];
    for off in 0..out.data.len() {
        decode(off, &mut idx);
        let src: usize = idx.iter().zip(&src_strides).map(|(i, s)| i * s).sum();
        out.data[off] = op.t.data[src];
    }
    Operand { letters: uniq, t: out }
}

fn pair_contract(x: &Operand, y: &Operand, keep: &[char]) -> Operand {
    let mut summed: Vec<char> = Vec::new();
    for &c in x.letters.iter().chain(&y.letters) {
        if !keep.contains(&c) && !summed.contains(&c) {
            summed.push(c);
        }
    }
    let kx: Vec<usize> = keep.iter().map(|&c| stride_of(&x.letters, c)).collect();
    let ky: Vec<usize> = keep.iter().map(|&c| stride_of(&y.letters, c)).collect();
    let sx: Vec<usize> = summed.iter().map(|&c| stride_of(&x.letters, c)).collect();
    let sy: Vec<usize> = summed.iter().map(|&c| stride_of(&y.letters, c)).collect();
    let (okx, oky) = offsets(keep, &kx, &ky);
    let (osx, osy) = offsets(&summed, &sx, &sy);
    let xd = &x.t.data;
    let yd = &y.t.data;
    let mut out = Tensor::zeros(keep.len());
    for (o, res) in out.data.iter_mut().enumerate() {
        let bx = okx[o];
        let by = oky[o];
        let mut acc = 0.0;
        for (ax, ay) in osx.iter().zip(&osy) {
            acc += xd[bx + ax] * yd[by + ay];
        }
        *res = acc;
    }
    Operand { letters: keep.to_vec(), t: out }
}

/// Einstein summation over tensors in dimension 8, e.g. `"ijpq,klpq->ijkl"`.
/// Letters repeated within an operand take the diagonal; letters absent from
/// the output are summed. Operands are folded pairwise from the left.
pub fn try_einsum(spec: &str, ops: &[&Tensor]) -> Result<Tensor, TensorError> {
    let bad = || TensorError::Spec(spec.to_string());
    let (lhs, out) = spec.split_once("->").ok_or_else(bad)?;
    let parts: Vec<&str> = lhs.split(',').collect();
    if parts.len() != ops.len() || ops.is_empty() {
        return Err(bad());
    }
    let out: Vec<char> = out.trim().chars().collect();
    let mut operands = Vec::new();
    for (p, t) in parts.iter().zip(ops) {
        let letters: Vec<char> = p.trim().chars().collect();
        if letters.len() != t.rank() || !letters.iter().all(|c| c.is_ascii_alphabetic()) {
            return Err(bad());
        }
        operands.push(take_diagonal(Operand { letters, t: (*t).clone() }));
    }
    for (n, c) in out.iter().enumerate() {
        if out[..n].contains(c) || !operands.iter().any(|o| o.letters.contains(c)) {
            return Err(bad());
        }
    }
    let mut cur = operands.remove(0);
    if operands.is_empty() {
        let one = Operand { letters: vec![], t: Tensor::scalar(1.0) };
        cur = pair_contract(&cur, &one, &out);
    }
    let n = operands.len();
    for i in 0..n {
        let later: Vec<char> = operands[i + 1..].iter().flat_map(|o| o.letters.clone()).collect();
        let mut keep: Vec<char> = Vec::new();
        for &c in cur.letters.iter().chain(&operands[i].letters) {
            if (out.contains(&c) || later.contains(&c)) && !keep.contains(&c) {
                keep.push(c);
            }
        }
        cur = pair_contract(&cur, &operands[i], &keep);
    }
    // Final reorder to the requested output.
    let axes: Vec<usize> = out
        .iter()
        .map(|c| cur.letters.iter().position(|x| x == c).expect("output letter present"))
        .collect();
    Ok(cur.t.permute(&axes))
}

/// [`try_einsum`] for specs known to be well formed.
pub fn einsum(spec: &str, ops: &[&Tensor]) -> Tensor {
    try_einsum(spec, ops).unwrap_or_else(|e| panic!("{e}"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rand_t(rank: usize, rng: &mut ChaCha8Rng) -> Tensor {
        Tensor::from_fn(rank, |_| rng.random_range(-1.0..1.0))
    }

    #[test]
    fn matrix_product_matches_naive_loops() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = rand_t(2, &mut rng);
        let b = rand_t(2, &mut rng);
        let c = contract(&a, &b, &[(1, 0)], None).unwrap();
        for i in 0..8 {
            for j in 0..8 {
                let mut s = 0.0;
                for k in 0..8 {
                    s += a.get(&[i, k]) * b.get(&[k, j]);
                }
                assert!((c.get(&[i, j]) - s).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn einsum_trace_and_three_operands() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = rand_t(3, &mut rng);
        let b = rand_t(2, &mut rng);
        let c = rand_t(2, &mut rng);
        let tr = einsum("iij->j", &[&a]);
        for j in 0..8 {
            let s: f64 = (0..8).map(|i| a.get(&[i, i, j])).sum();
            assert!((tr.get(&[j]) - s).abs() < 1e-14);
        }
        let r = einsum("ipq,pj,qk->kji", &[&a, &b, &c]);
        let (i, j, k) = (3, 5, 1);
        let mut s = 0.0;
        for p in 0..8 {
            for q in 0..8 {
                s += a.get(&[i, p, q]) * b.get(&[p, j]) * c.get(&[q, k]);
            }
        }
        assert!((r.get(&[k, j, i]) - s).abs() < 1e-13);
    }

    #[test]
    fn antisymmetrize_matches_six_permutation_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let t = rand_t(3, &mut rng);
        let a = t.antisymmetrize(&[0, 1, 2]).unwrap();
        let (i, j, k) = (1, 4, 6);
        let s = (t.get(&[i, j, k]) + t.get(&[j, k, i]) + t.get(&[k, i, j])
            - t.get(&[j, i, k])
            - t.get(&[i, k, j])
            - t.get(&[k, j, i]))
            / 6.0;
        assert!((a.get(&[i, j, k]) - s).abs() < 1e-15);
        let aa = a.antisymmetrize(&[0, 1, 2]).unwrap();
        assert!(aa.sub(&a).max_abs() < 1e-15);
    }

    #[test]
    fn slot_errors() {
        let t = Tensor::zeros(2);
        assert_eq!(t.antisymmetrize(&[0, 2]), Err(TensorError::SlotOutOfRange { slot: 2, rank: 2 }));
        assert_eq!(t.antisymmetrize(&[1, 1]), Err(TensorError::DuplicateSlot(1)));
        assert!(try_einsum("ij,jk", &[&t, &t]).is_err());
        assert!(try_einsum("ij->ik", &[&t]).is_err());
    }

    #[test]
    fn delta_composed_with_delta() {
        let d = Tensor::delta();
        assert_eq!(contract(&d, &d, &[(1, 0)], None).unwrap(), d);
    }

    #[test]
    fn permute_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let t = rand_t(3, &mut rng);
        let p = t.permute(&[2, 0, 1]);
        assert_eq!(p.get(&[1, 2, 3]), t.get(&[2, 3, 1]));
    }
}
