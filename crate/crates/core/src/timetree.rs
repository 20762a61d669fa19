//! Binary-tree time structure: leaf paths, minimal covers `Node(t)`, node
//! matrices `F_w`, and trapdoor delegation for key evolution.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use zeroize::Zeroize;

use crate::error::{Error, Result};
use crate::trapdoor::ext_basis;
use crate::zq::{concat_cols, is_basis_of_lambda_perp, IntMatrix, Modulus};

/// A tree node, the bit string from the root (`t_1` first). Ordered by
/// depth, then by value.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct NodeId(Vec<bool>);

impl NodeId {
    pub fn root() -> Self {
        Self(Vec::new())
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        Self(bits)
    }

    /// Parses `"ε"`, `""` or a string of `0`/`1`.
    pub fn parse(s: &str) -> Option<Self> {
        if s == "ε" {
            return Some(Self::root());
        }
        s.chars()
            .map(|c| match c {
                '0' => Some(false),
                '1' => Some(true),
                _ => None,
            })
            .collect::<Option<Vec<_>>>()
            .map(Self)
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    /// True for the root.
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn child(&self, bit: bool) -> Self {
        let mut v = self.0.clone();
        v.push(bit);
        Self(v)
    }

    pub fn prefix(&self, len: usize) -> Self {
        Self(self.0[..len].to_vec())
    }

    /// True when `self` is a (not necessarily proper) prefix of `other`.
    pub fn is_ancestor_of(&self, other: &NodeId) -> bool {
        other.0.starts_with(&self.0)
    }

    fn value(&self) -> u64 {
        self.0.iter().fold(0, |acc, &b| acc << 1 | b as u64)
    }
}

impl Ord for NodeId {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len().cmp(&other.len()).then_with(|| self.value().cmp(&other.value()))
    }
}

impl PartialOrd for NodeId {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("ε");
        }
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "NodeId({self})")
    }
}

fn check_period(t: u64, ell: u8) -> Result<()> {
    if ell > 63 || t >= 1u64 << ell {
        return Err(Error::PeriodOutOfRange { t, ell });
    }
    Ok(())
}

/// Big-endian binary expansion of `t` on `ell` bits.
pub fn leaf_path(t: u64, ell: u8) -> Result<NodeId> {
    check_period(t, ell)?;
    Ok(NodeId((0..ell).rev().map(|i| t >> i & 1 == 1).collect()))
}

/// `Node(t)`: the smallest node set containing an ancestor of every leaf
/// `>= t` and no ancestor of a leaf `< t`, sorted by (depth, value).
pub fn minimal_cover(t: u64, ell: u8) -> Result<Vec<NodeId>> {
    let path = leaf_path(t, ell)?;
    let bits = path.bits();
    let last_one = bits.iter().rposition(|&b| b).map_or(0, |i| i + 1);
    let mut out = vec![path.prefix(last_one)];
    for i in 0..last_one {
        if !bits[i] {
            out.push(path.prefix(i).child(true));
        }
    }
    out.sort();
    Ok(out)
}

/// The public matrices the tree is built from: `A_0` and `A_i^(b)` for
/// `i = 1..ell`, `b in {0, 1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeMatrices {
    pub a0: IntMatrix,
    pub blocks: Vec<[IntMatrix; 2]>,
}

impl TreeMatrices {
    pub fn depth(&self) -> usize {
        self.blocks.len()
    }

    pub fn block_width(&self) -> usize {
        self.a0.cols()
    }
}

/// `F_w = [A_0 | A_1^(w_1) | ... | A_len^(w_len)]`.
pub fn node_matrix(tree: &TreeMatrices, w: &NodeId) -> Result<IntMatrix> {
    if w.len() > tree.depth() {
        return Err(Error::DimensionMismatch(format!("node {w} deeper than the tree ({})", tree.depth())));
    }
    let mut parts = vec![&tree.a0];
    for (i, &b) in w.bits().iter().enumerate() {
        parts.push(&tree.blocks[i][b as usize]);
    }
    concat_cols(&parts)
}

/// A trapdoor basis of `L^perp_q(F_node)`; the basis is wiped on drop.
#[derive(Clone, PartialEq)]
pub struct NodeKey {
    node: NodeId,
    basis: IntMatrix,
}

impl fmt::Debug for NodeKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "NodeKey({}, {}x{})", self.node, self.basis.rows(), self.basis.cols())
    }
}

impl Drop for NodeKey {
    fn drop(&mut self) {
        self.basis.zeroize();
    }
}

impl NodeKey {
    /// Checks the basis against `F_node` before accepting it.
    pub fn new(tree: &TreeMatrices, q: Modulus, node: NodeId, basis: IntMatrix) -> Result<Self> {
        let f = node_matrix(tree, &node)?;
        if !is_basis_of_lambda_perp(&f, &basis, q) {
            return Err(Error::InvalidTrapdoor(format!("stored basis for node {node} fails the lattice check")));
        }
        Ok(Self { node, basis })
    }

    /// For bases already checked by their producer (`trap_gen`).
    pub(crate) fn from_verified(node: NodeId, basis: IntMatrix) -> Self {
        Self { node, basis }
    }

    pub fn node(&self) -> &NodeId {
        &self.node
    }

    pub fn basis(&self) -> &IntMatrix {
        &self.basis
    }
}

/// Key for `w` delegated from `ancestor` through `ext_basis`.
pub fn derive_node_key(tree: &TreeMatrices, q: Modulus, ancestor: &NodeKey, w: &NodeId) -> Result<NodeKey> {
    if !ancestor.node.is_ancestor_of(w) {
        return Err(Error::NotAnAncestor { node: ancestor.node.clone(), target: w.clone() });
    }
    if ancestor.node == *w {
        return Ok(ancestor.clone());
    }
    let f = node_matrix(tree, w)?;
    let width = (ancestor.node.len() + 1) * tree.block_width();
    let basis = ext_basis(&f, (0, width), &ancestor.basis, q)?;
    if !is_basis_of_lambda_perp(&f, &basis, q) {
        return Err(Error::InvalidTrapdoor(format!("delegated basis for {w} fails the lattice check")));
    }
    Ok(NodeKey { node: w.clone(), basis })
}

/// `sk_t`: node keys for exactly `Node(t)`. Once past the last period the
/// key is empty and `t == 2^ell`.
#[derive(Debug, Clone, PartialEq)]
pub struct SecretKey {
    ell: u8,
    t: u64,
    nodes: BTreeMap<NodeId, NodeKey>,
}

impl SecretKey {
    /// `sk_0 = { eps -> T_A0 }`.
    pub fn initial(ell: u8, root: NodeKey) -> Result<Self> {
        if !root.node.is_root() {
            return Err(Error::InvalidTrapdoor(format!("initial key must be for the root, got {}", root.node)));
        }
        check_period(0, ell)?;
        Ok(Self { ell, t: 0, nodes: BTreeMap::from([(NodeId::root(), root)]) })
    }

    /// Assembles a key from stored parts, enforcing the cover invariant.
    pub fn from_parts(ell: u8, t: u64, nodes: Vec<NodeKey>) -> Result<Self> {
        let tau = 1u64.checked_shl(ell as u32).filter(|_| ell <= 63).ok_or(Error::PeriodOutOfRange { t, ell })?;
        let expected = if t == tau {
            Vec::new()
        } else {
            minimal_cover(t, ell)?
        };
        let got: Vec<NodeId> = nodes.iter().map(|k| k.node.clone()).collect();
        let mut sorted = got.clone();
        sorted.sort();
        if sorted != expected {
            return Err(Error::Format(format!(
                "key for period {t} stores nodes {:?}, the cover is {:?}",
                sorted.iter().map(|n| n.to_string()).collect::<Vec<_>>(),
                expected.iter().map(|n| n.to_string()).collect::<Vec<_>>()
            )));
        }
        Ok(Self { ell, t, nodes: nodes.into_iter().map(|k| (k.node.clone(), k)).collect() })
    }

    pub fn ell(&self) -> u8 {
        self.ell
    }

    pub fn tau(&self) -> u64 {
        1u64 << self.ell
    }

    /// Current period; equals `tau` for the empty post-final key.
    pub fn period(&self) -> u64 {
        self.t
    }

    pub fn is_expired(&self) -> bool {
        self.t == self.tau()
    }

    pub fn nodes(&self) -> impl Iterator<Item = &NodeKey> {
        self.nodes.values()
    }

    pub fn node_ids(&self) -> Vec<NodeId> {
        self.nodes.keys().cloned().collect()
    }

    pub fn get(&self, w: &NodeId) -> Option<&NodeKey> {
        self.nodes.get(w)
    }

    /// The stored node with the longest prefix of `w`.
    pub fn deepest_ancestor(&self, w: &NodeId) -> Option<&NodeKey> {
        self.nodes.values().filter(|k| k.node.is_ancestor_of(w)).max_by_key(|k| k.node.len())
    }

    /// Trapdoor for `w`, delegated from the deepest stored ancestor.
    pub fn key_for(&self, tree: &TreeMatrices, q: Modulus, w: &NodeId) -> Result<NodeKey> {
        let anc = self.deepest_ancestor(w).ok_or_else(|| Error::MissingNode(w.clone()))?;
        derive_node_key(tree, q, anc, w)
    }

    /// Trapdoor for the leaf of period `t` (which must be the key's period).
    pub fn leaf_key(&self, tree: &TreeMatrices, q: Modulus, t: u64) -> Result<NodeKey> {
        if self.is_expired() {
            return Err(Error::LastPeriod);
        }
        if t != self.t {
            return Err(Error::TimeMismatch { key: self.t, requested: t });
        }
        self.key_for(tree, q, &leaf_path(t, self.ell)?)
    }
}

/// `sk_t -> sk_{t+1}`. Keys for new cover nodes come from their deepest
/// ancestor in `sk_t`; keys leaving the cover are wiped with `sk`.
/// Updating the key of the last period yields the empty key.
pub fn key_update(tree: &TreeMatrices, q: Modulus, sk: SecretKey) -> Result<SecretKey> {
    if sk.is_expired() {
        return Err(Error::LastPeriod);
    }
    let next = sk.t + 1;
    if next == sk.tau() {
        return Ok(SecretKey { ell: sk.ell, t: next, nodes: BTreeMap::new() });
    }
    let mut nodes = BTreeMap::new();
    for w in minimal_cover(next, sk.ell)? {
        let key = match sk.nodes.get(&w) {
            Some(k) => k.clone(),
            None => sk.key_for(tree, q, &w)?,
        };
        nodes.insert(w, key);
    }
    Ok(SecretKey { ell: sk.ell, t: next, nodes })
}
