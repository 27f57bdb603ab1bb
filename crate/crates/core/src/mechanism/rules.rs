use std::collections::HashMap;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};

use super::MechanismError;
use crate::env::{Environment, ValueSet};
use crate::rational::Rational;

/// A social choice function: probability of Reform at each ordered profile.
///
/// Profiles are passed as indices into the environment's [`ValueSet`].
pub trait Mechanism {
    fn allocation(&self, values: &ValueSet, profile: &[usize]) -> Rational;

    /// Checks that the rule is defined on every profile of `env`.
    fn check_compatible(&self, env: &Environment) -> Result<(), MechanismError>;
}

/// Multiset of reports in canonical (ascending index) order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ReportMultiset(Vec<usize>);

impl ReportMultiset {
    pub fn from_profile(profile: &[usize]) -> Self {
        let mut v = profile.to_vec();
        v.sort_unstable();
        Self(v)
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn count(&self, idx: usize) -> usize {
        self.0.iter().filter(|&&v| v == idx).count()
    }

    pub fn values<'a>(&'a self, values: &'a ValueSet) -> impl Iterator<Item = &'a Rational> + 'a {
        self.0.iter().map(move |&i| values.value(i))
    }
}

/// Bijection between the `C(k+n-1, n)` multisets of size `n` over `k`
/// support points and `0..len`, in lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultisetIndex {
    n: usize,
    k: usize,
    multisets: Vec<ReportMultiset>,
    lookup: HashMap<ReportMultiset, usize>,
}

impl MultisetIndex {
    pub fn new(n: usize, k: usize) -> Self {
        let mut multisets = Vec::new();
        let mut current = Vec::with_capacity(n);
        fn extend(n: usize, k: usize, start: usize, current: &mut Vec<usize>, out: &mut Vec<ReportMultiset>) {
            if current.len() == n {
                out.push(ReportMultiset(current.clone()));
                return;
            }
            for v in start..k {
                current.push(v);
                extend(n, k, v, current, out);
                current.pop();
            }
        }
        extend(n, k, 0, &mut current, &mut multisets);
        let lookup = multisets.iter().enumerate().map(|(i, m)| (m.clone(), i)).collect();
        Self {
            n,
            k,
            multisets,
            lookup,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn support_size(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.multisets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.multisets.is_empty()
    }

    pub fn multisets(&self) -> &[ReportMultiset] {
        &self.multisets
    }

    pub fn position(&self, m: &ReportMultiset) -> Option<usize> {
        self.lookup.get(m).copied()
    }

    /// Index of the multiset an ordered profile canonicalizes to.
    pub fn position_of_profile(&self, profile: &[usize]) -> usize {
        self.lookup[&ReportMultiset::from_profile(profile)]
    }
}

/// Anonymous cardinal rule: one allocation per report multiset.
#[derive(Debug, Clone, PartialEq)]
pub struct AnonymousScf {
    index: Arc<MultisetIndex>,
    allocation: Vec<Rational>,
}

impl AnonymousScf {
    pub fn new(index: Arc<MultisetIndex>, allocation: Vec<Rational>) -> Result<Self, MechanismError> {
        if allocation.len() != index.len() {
            return Err(MechanismError::Shape(format!(
                "{} allocations for {} multisets",
                allocation.len(),
                index.len()
            )));
        }
        if let Some(a) = allocation.iter().find(|a| a.is_negative() || *a > &Rational::one()) {
            return Err(MechanismError::OutOfRange(a.clone()));
        }
        Ok(Self { index, allocation })
    }

    pub fn zeros(index: Arc<MultisetIndex>) -> Self {
        let allocation = vec![Rational::zero(); index.len()];
        Self { index, allocation }
    }

    pub fn from_fn(
        index: Arc<MultisetIndex>,
        mut f: impl FnMut(&ReportMultiset) -> Rational,
    ) -> Result<Self, MechanismError> {
        let allocation = index.multisets().iter().map(&mut f).collect();
        Self::new(index, allocation)
    }

    pub fn index(&self) -> &Arc<MultisetIndex> {
        &self.index
    }

    pub fn get(&self, m: &ReportMultiset) -> Option<&Rational> {
        self.index.position(m).map(|i| &self.allocation[i])
    }

    pub fn set(&mut self, m: &ReportMultiset, value: Rational) -> Result<(), MechanismError> {
        if value.is_negative() || value > Rational::one() {
            return Err(MechanismError::OutOfRange(value));
        }
        let i = self
            .index
            .position(m)
            .ok_or_else(|| MechanismError::Shape(format!("unknown multiset {:?}", m.as_slice())))?;
        self.allocation[i] = value;
        Ok(())
    }

    pub fn allocations(&self) -> &[Rational] {
        &self.allocation
    }

    pub fn entries(&self) -> impl Iterator<Item = (&ReportMultiset, &Rational)> {
        self.index.multisets().iter().zip(&self.allocation)
    }
}

impl Mechanism for AnonymousScf {
    fn allocation(&self, _values: &ValueSet, profile: &[usize]) -> Rational {
        self.allocation[self.index.position_of_profile(profile)].clone()
    }

    fn check_compatible(&self, env: &Environment) -> Result<(), MechanismError> {
        if self.index.n() != env.n() || self.index.support_size() != env.values().len() {
            return Err(MechanismError::Incompatible(format!(
                "anonymous table is over {} agents and {} values, environment has {} and {}",
                self.index.n(),
                self.index.support_size(),
                env.n(),
                env.values().len()
            )));
        }
        Ok(())
    }
}

/// `f^(k)`: Reform iff at least `k` agents report a positive value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QualifiedMajorityRule {
    pub k: usize,
}

impl QualifiedMajorityRule {
    pub fn new(k: usize) -> Self {
        Self { k }
    }
}

impl Mechanism for QualifiedMajorityRule {
    fn allocation(&self, values: &ValueSet, profile: &[usize]) -> Rational {
        let supporters = profile.iter().filter(|&&v| values.is_positive(v)).count();
        if supporters >= self.k {
            Rational::one()
        } else {
            Rational::zero()
        }
    }

    fn check_compatible(&self, env: &Environment) -> Result<(), MechanismError> {
        if self.k > env.n() + 1 {
            return Err(MechanismError::Incompatible(format!(
                "threshold {} exceeds n+1 = {}",
                self.k,
                env.n() + 1
            )));
        }
        Ok(())
    }
}

/// Reform iff the supporters' total weight beats the quorum; `tie_value` on equality.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedMajorityRule {
    pub weights: Vec<Rational>,
    pub quorum: Rational,
    pub tie_value: Rational,
}

impl Mechanism for WeightedMajorityRule {
    fn allocation(&self, values: &ValueSet, profile: &[usize]) -> Rational {
        let support: Rational = self
            .weights
            .iter()
            .zip(profile)
            .filter(|(_, &v)| values.is_positive(v))
            .map(|(w, _)| w)
            .sum();
        match support.cmp(&self.quorum) {
            std::cmp::Ordering::Greater => Rational::one(),
            std::cmp::Ordering::Less => Rational::zero(),
            std::cmp::Ordering::Equal => self.tie_value.clone(),
        }
    }

    fn check_compatible(&self, env: &Environment) -> Result<(), MechanismError> {
        if self.weights.len() != env.n() {
            return Err(MechanismError::Incompatible(format!(
                "{} weights for {} agents",
                self.weights.len(),
                env.n()
            )));
        }
        if self.tie_value.is_negative() || self.tie_value > Rational::one() {
            return Err(MechanismError::OutOfRange(self.tie_value.clone()));
        }
        Ok(())
    }
}

/// Arbitrary (possibly non-anonymous) rule tabulated over ordered profiles.
/// Entries follow [`crate::env::for_each_profile`] order.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderedTable {
    n: usize,
    k: usize,
    table: Vec<Rational>,
}

impl OrderedTable {
    pub fn new(n: usize, k: usize, table: Vec<Rational>) -> Result<Self, MechanismError> {
        let expected = k.checked_pow(n as u32).unwrap_or(usize::MAX);
        if table.len() != expected {
            return Err(MechanismError::Shape(format!(
                "ordered table has {} entries, expected {}^{} = {}",
                table.len(),
                k,
                n,
                expected
            )));
        }
        if let Some(a) = table.iter().find(|a| a.is_negative() || *a > &Rational::one()) {
            return Err(MechanismError::OutOfRange(a.clone()));
        }
        Ok(Self { n, k, table })
    }

    /// Tabulates any mechanism over all ordered profiles of `env`.
    pub fn tabulate<M: Mechanism + ?Sized>(env: &Environment, f: &M) -> Self {
        let (n, k) = (env.n(), env.values().len());
        let mut table = Vec::with_capacity(k.pow(n as u32));
        crate::env::for_each_profile(n, k, |p| table.push(f.allocation(env.values(), p)));
        Self { n, k, table }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn support_size(&self) -> usize {
        self.k
    }

    pub fn entries(&self) -> &[Rational] {
        &self.table
    }

    pub fn offset(&self, profile: &[usize]) -> usize {
        profile.iter().fold(0, |acc, &v| acc * self.k + v)
    }

    /// True iff every permutation of every profile gets the same allocation.
    /// Checking adjacent transpositions suffices since they generate all permutations.
    pub fn is_anonymous(&self) -> bool {
        let mut anonymous = true;
        crate::env::for_each_profile(self.n, self.k, |p| {
            if !anonymous {
                return;
            }
            let here = &self.table[self.offset(p)];
            let mut q = p.to_vec();
            for i in 0..self.n.saturating_sub(1) {
                q.swap(i, i + 1);
                if &self.table[self.offset(&q)] != here {
                    anonymous = false;
                    return;
                }
                q.swap(i, i + 1);
            }
        });
        anonymous
    }

    /// The anonymous table this ordered table induces, if it is anonymous.
    pub fn to_anonymous(&self) -> Option<AnonymousScf> {
        if !self.is_anonymous() {
            return None;
        }
        let index = Arc::new(MultisetIndex::new(self.n, self.k));
        let allocation = index
            .multisets()
            .iter()
            .map(|m| self.table[self.offset(m.as_slice())].clone())
            .collect();
        Some(AnonymousScf { index, allocation })
    }
}

impl Mechanism for OrderedTable {
    fn allocation(&self, _values: &ValueSet, profile: &[usize]) -> Rational {
        self.table[self.offset(profile)].clone()
    }

    fn check_compatible(&self, env: &Environment) -> Result<(), MechanismError> {
        if self.n != env.n() || self.k != env.values().len() {
            return Err(MechanismError::Incompatible(format!(
                "ordered table is over {} agents and {} values, environment has {} and {}",
                self.n,
                self.k,
                env.n(),
                env.values().len()
            )));
        }
        Ok(())
    }
}

/// Ordinal rule: allocation depends only on the coalition of positive
/// reporters. `phi[mask]` with bit `i` set iff agent `i` is positive.
#[derive(Debug, Clone, PartialEq)]
pub struct CoalitionRule {
    n: usize,
    phi: Vec<Rational>,
}

impl CoalitionRule {
    pub fn new(n: usize, phi: Vec<Rational>) -> Result<Self, MechanismError> {
        if phi.len() != 1 << n {
            return Err(MechanismError::Shape(format!(
                "{} coalition values for {} agents",
                phi.len(),
                n
            )));
        }
        Ok(Self { n, phi })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn phi(&self, mask: usize) -> &Rational {
        &self.phi[mask]
    }

    pub fn values(&self) -> &[Rational] {
        &self.phi
    }

    /// True iff `phi(T)` depends only on `|T|`.
    pub fn is_anonymous(&self) -> bool {
        let mut by_size: Vec<Option<&Rational>> = vec![None; self.n + 1];
        self.phi.iter().enumerate().all(|(mask, v)| {
            let slot = &mut by_size[mask.count_ones() as usize];
            match slot {
                Some(seen) => *seen == v,
                None => {
                    *slot = Some(v);
                    true
                }
            }
        })
    }
}

impl Mechanism for CoalitionRule {
    fn allocation(&self, values: &ValueSet, profile: &[usize]) -> Rational {
        self.phi[super::coalition_mask(values, profile)].clone()
    }

    fn check_compatible(&self, env: &Environment) -> Result<(), MechanismError> {
        if self.n != env.n() {
            return Err(MechanismError::Incompatible(format!(
                "coalition rule over {} agents, environment has {}",
                self.n,
                env.n()
            )));
        }
        Ok(())
    }
}

/// Any of the supported rule kinds, as read from or written to JSON.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyMechanism {
    Anonymous(AnonymousScf),
    Qmr(QualifiedMajorityRule),
    Wmr(WeightedMajorityRule),
    OrderedTable(OrderedTable),
}

impl AnyMechanism {
    pub fn kind(&self) -> &'static str {
        match self {
            AnyMechanism::Anonymous(_) => "anonymous",
            AnyMechanism::Qmr(_) => "qmr",
            AnyMechanism::Wmr(_) => "wmr",
            AnyMechanism::OrderedTable(_) => "ordered_table",
        }
    }

    fn inner(&self) -> &dyn Mechanism {
        match self {
            AnyMechanism::Anonymous(f) => f,
            AnyMechanism::Qmr(f) => f,
            AnyMechanism::Wmr(f) => f,
            AnyMechanism::OrderedTable(f) => f,
        }
    }
}

impl Mechanism for AnyMechanism {
    fn allocation(&self, values: &ValueSet, profile: &[usize]) -> Rational {
        self.inner().allocation(values, profile)
    }

    fn check_compatible(&self, env: &Environment) -> Result<(), MechanismError> {
        self.inner().check_compatible(env)
    }
}
