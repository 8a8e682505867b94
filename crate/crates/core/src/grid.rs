//! Adaptive hierarchical element sets.
//!
//! An element is a tensor product of 1D hierarchical nodes, identified by its level
//! multi-index `l` and translation multi-index `j`. The active set is kept
//! downward-closed: every parent of an active element is active. Elements live in
//! insertion order in a vector, and the hash map is used for lookup only, so all
//! traversals are deterministic.

use rustc_hash::FxHashMap;
use smallvec::SmallVec;

use crate::basis::Node1D;
use crate::error::{Error, Result};

pub type MultiIndex = SmallVec<[u32; 3]>;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ElementKey {
    pub levels: MultiIndex,
    pub indices: MultiIndex,
}

impl ElementKey {
    pub fn new(levels: &[u32], indices: &[u32]) -> Self {
        assert_eq!(levels.len(), indices.len());
        Self { levels: levels.into(), indices: indices.into() }
    }

    pub fn from_nodes(nodes: &[Node1D]) -> Self {
        Self {
            levels: nodes.iter().map(|n| n.level).collect(),
            indices: nodes.iter().map(|n| n.index).collect(),
        }
    }

    pub fn root(dim: usize) -> Self {
        Self { levels: SmallVec::from_elem(0, dim), indices: SmallVec::from_elem(0, dim) }
    }

    pub fn dim(&self) -> usize {
        self.levels.len()
    }

    pub fn node(&self, m: usize) -> Node1D {
        Node1D { level: self.levels[m], index: self.indices[m] }
    }

    pub fn with_node(&self, m: usize, node: Node1D) -> Self {
        let mut k = self.clone();
        k.levels[m] = node.level;
        k.indices[m] = node.index;
        k
    }

    pub fn level_l1(&self) -> u32 {
        self.levels.iter().sum()
    }

    pub fn level_linf(&self) -> u32 {
        self.levels.iter().copied().max().unwrap_or(0)
    }

    /// Collision-free 64-bit key, valid while `max_level <= 64 / dim`.
    pub fn packed(&self) -> u64 {
        let bits = 64 / self.dim() as u32;
        (0..self.dim()).fold(0u64, |acc, m| acc | ((self.node(m).id() as u64) << (bits * m as u32)))
    }

    pub fn parents(&self) -> Vec<ElementKey> {
        (0..self.dim())
            .filter_map(|m| self.node(m).parent().map(|p| self.with_node(m, p)))
            .collect()
    }

    pub fn children(&self, max_level: u32) -> Vec<ElementKey> {
        (0..self.dim())
            .filter(|&m| self.levels[m] < max_level)
            .flat_map(|m| self.node(m).children().into_iter().map(move |c| (m, c)))
            .map(|(m, c)| self.with_node(m, c))
            .collect()
    }

    /// Closed support as a box.
    pub fn support(&self) -> Vec<(f64, f64)> {
        (0..self.dim()).map(|m| self.node(m).support()).collect()
    }
}

impl std::fmt::Display for ElementKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "l={:?} j={:?}", self.levels.as_slice(), self.indices.as_slice())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Element {
    pub key: ElementKey,
    /// Active children counted over all directions.
    pub num_children: u32,
    /// Artificial viscosity assigned for the current step.
    pub viscosity: f64,
}

impl Element {
    pub fn is_leaf(&self) -> bool {
        self.num_children == 0
    }
}

/// Which level multi-indices a non-adaptive grid contains.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LevelSet {
    /// `|l|_∞ <= N`.
    Full,
    /// `|l|_1 <= N`.
    Sparse,
}

#[derive(Clone, Debug)]
pub struct AdaptiveGrid {
    dim: usize,
    k: usize,
    max_level: u32,
    block: usize,
    elements: Vec<Element>,
    coeffs: Vec<f64>,
    lookup: FxHashMap<u64, usize>,
}

impl AdaptiveGrid {
    pub fn new(dim: usize, k: usize, max_level: u32) -> Result<Self> {
        if dim == 0 || dim > 3 {
            return Err(Error::Config(format!("dimension {dim} is not supported")));
        }
        if max_level as usize > 64 / dim {
            return Err(Error::Config(format!("level {max_level} too deep for dimension {dim}")));
        }
        Ok(Self {
            dim,
            k,
            max_level,
            block: (k + 1).pow(dim as u32),
            elements: Vec::new(),
            coeffs: Vec::new(),
            lookup: FxHashMap::default(),
        })
    }

    /// All elements of a full or sparse grid, with zero coefficients.
    pub fn with_level_set(dim: usize, k: usize, max_level: u32, set: LevelSet) -> Result<Self> {
        let mut g = Self::new(dim, k, max_level)?;
        for key in level_set_keys(dim, max_level, |l| match set {
            LevelSet::Full => l.iter().all(|&v| v <= max_level),
            LevelSet::Sparse => l.iter().sum::<u32>() <= max_level,
        }) {
            g.insert(key, None)?;
        }
        Ok(g)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.k
    }

    pub fn max_level(&self) -> u32 {
        self.max_level
    }

    /// Coefficients per element, `(k+1)^d`.
    pub fn block_size(&self) -> usize {
        self.block
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn dof(&self) -> usize {
        self.coeffs.len()
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn element(&self, i: usize) -> &Element {
        &self.elements[i]
    }

    pub fn set_viscosity(&mut self, i: usize, nu: f64) {
        self.elements[i].viscosity = nu;
    }

    pub fn key(&self, i: usize) -> &ElementKey {
        &self.elements[i].key
    }

    pub fn keys(&self) -> impl Iterator<Item = &ElementKey> {
        self.elements.iter().map(|e| &e.key)
    }

    pub fn coeffs(&self, i: usize) -> &[f64] {
        &self.coeffs[i * self.block..(i + 1) * self.block]
    }

    pub fn coeffs_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.coeffs[i * self.block..(i + 1) * self.block]
    }

    /// All coefficients, element-major in element order.
    pub fn all_coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn set_all_coeffs(&mut self, c: &[f64]) {
        assert_eq!(c.len(), self.coeffs.len());
        self.coeffs.copy_from_slice(c);
    }

    pub fn find(&self, key: &ElementKey) -> Option<usize> {
        self.lookup.get(&key.packed()).copied()
    }

    pub fn contains(&self, key: &ElementKey) -> bool {
        self.lookup.contains_key(&key.packed())
    }

    pub fn block_norm(&self, i: usize) -> f64 {
        self.coeffs(i).iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// L2 norm of the represented function (the basis is orthonormal).
    pub fn l2_norm(&self) -> f64 {
        self.coeffs.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Inserts `key`, whose parents must all be present. Returns its position.
    pub fn insert(&mut self, key: ElementKey, coeffs: Option<&[f64]>) -> Result<usize> {
        if key.dim() != self.dim || key.levels.iter().any(|&l| l > self.max_level) {
            return Err(Error::Contract(format!("element {key} outside the hierarchy")));
        }
        if let Some(i) = self.find(&key) {
            return Ok(i);
        }
        let parents = key.parents();
        let mut pos = Vec::with_capacity(parents.len());
        for p in &parents {
            pos.push(self.find(p).ok_or_else(|| Error::Contract(format!("parent {p} of {key} missing")))?);
        }
        for p in pos {
            self.elements[p].num_children += 1;
        }
        let i = self.elements.len();
        self.lookup.insert(key.packed(), i);
        self.elements.push(Element { key, num_children: 0, viscosity: 0.0 });
        match coeffs {
            Some(c) => {
                assert_eq!(c.len(), self.block);
                self.coeffs.extend_from_slice(c);
            }
            None => self.coeffs.extend(std::iter::repeat_n(0.0, self.block)),
        }
        Ok(i)
    }

    /// Inserts `key` with zero coefficients, first inserting any missing ancestors.
    pub fn insert_with_closure(&mut self, key: &ElementKey) -> Result<usize> {
        if let Some(i) = self.find(key) {
            return Ok(i);
        }
        for p in key.parents() {
            self.insert_with_closure(&p)?;
        }
        self.insert(key.clone(), None)
    }

    /// Removes a leaf element; the last element takes its position.
    pub fn remove(&mut self, i: usize) -> Result<()> {
        if !self.elements[i].is_leaf() {
            return Err(Error::Contract(format!("element {} is not a leaf", self.elements[i].key)));
        }
        for p in self.elements[i].key.parents() {
            let pi = self.find(&p).expect("downward-closed");
            self.elements[pi].num_children -= 1;
        }
        let last = self.elements.len() - 1;
        self.lookup.remove(&self.elements[i].key.packed());
        self.elements.swap_remove(i);
        let b = self.block;
        if i != last {
            self.coeffs.copy_within(last * b..(last + 1) * b, i * b);
            self.lookup.insert(self.elements[i].key.packed(), i);
        }
        self.coeffs.truncate(last * b);
        Ok(())
    }

    /// Adds the children of every element whose block in `predicted` has norm `>= eps`.
    /// New elements get zero coefficients. Returns the number of inserted elements.
    pub fn refine(&mut self, predicted: &[f64], eps: f64) -> Result<usize> {
        assert_eq!(predicted.len(), self.coeffs.len());
        let before = self.len();
        let b = self.block;
        for i in 0..before {
            let norm = predicted[i * b..(i + 1) * b].iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm >= eps {
                for c in self.elements[i].key.children(self.max_level) {
                    self.insert_with_closure(&c)?;
                }
            }
        }
        Ok(self.len() - before)
    }

    /// Repeatedly removes leaves with block norm `< eta`, deepest first. Elements with
    /// `|l|_∞ <= 1` are kept. Returns the number of removed elements.
    pub fn coarsen(&mut self, eta: f64) -> usize {
        let mut removed = 0;
        loop {
            let mut cand: Vec<(u32, ElementKey)> = (0..self.len())
                .filter(|&i| {
                    let e = &self.elements[i];
                    e.is_leaf() && e.key.level_linf() > 1 && self.block_norm(i) < eta
                })
                .map(|i| (self.elements[i].key.level_l1(), self.elements[i].key.clone()))
                .collect();
            if cand.is_empty() {
                return removed;
            }
            cand.sort_by(|a, b| b.cmp(a));
            for (_, key) in cand {
                let i = self.find(&key).expect("present");
                self.remove(i).expect("leaf");
                removed += 1;
            }
        }
    }

    /// Leaf elements in element order.
    pub fn leaves(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.elements[i].is_leaf()).collect()
    }

    pub fn is_downward_closed(&self) -> bool {
        self.elements.iter().all(|e| e.key.parents().iter().all(|p| self.contains(p)))
    }

    /// Deepest `|l|_∞` present.
    pub fn finest_level(&self) -> u32 {
        self.keys().map(ElementKey::level_linf).max().unwrap_or(0)
    }
}

/// Element keys of a level set, ordered by `|l|_1`, then levels, then indices.
pub fn level_set_keys(dim: usize, max_level: u32, accept: impl Fn(&[u32]) -> bool) -> Vec<ElementKey> {
    let mut levels: Vec<Vec<u32>> = Vec::new();
    let mut cur = vec![0u32; dim];
    loop {
        if accept(&cur) {
            levels.push(cur.clone());
        }
        let mut m = 0;
        loop {
            if m == dim {
                levels.sort_by_key(|l| (l.iter().sum::<u32>(), l.clone()));
                return levels.iter().flat_map(|l| keys_at_levels(l)).collect();
            }
            cur[m] += 1;
            if cur[m] <= max_level {
                break;
            }
            cur[m] = 0;
            m += 1;
        }
    }
}

/// All element keys with level multi-index `levels`.
pub fn keys_at_levels(levels: &[u32]) -> Vec<ElementKey> {
    let counts: Vec<u32> = levels.iter().map(|&l| if l == 0 { 1 } else { 1 << (l - 1) }).collect();
    let total: u32 = counts.iter().product();
    (0..total)
        .map(|mut flat| {
            let mut idx = vec![0u32; levels.len()];
            for m in (0..levels.len()).rev() {
                idx[m] = flat % counts[m];
                flat /= counts[m];
            }
            ElementKey::new(levels, &idx)
        })
        .collect()
}
