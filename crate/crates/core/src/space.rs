//! Finite outcome/information spaces and their events.
//!
//! In the finite setting every sigma-algebra is the full power set, so an
//! [`Event`] is just a subset of point indices. A space may carry a declared
//! factorization into a list of factor spaces; points of such a product are
//! ordered row-major and labeled `"(l1,l2)"`. The one-point space stands in
//! for the trivial information space (the `{empty, all}` algebra).

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::{Error, Result};

struct SpaceInner {
    labels: Vec<String>,
    index: HashMap<String, usize>,
    factors: Vec<FiniteSpace>,
}

/// A finite set of distinct labeled points.
///
/// Cloning is cheap (shared storage); equality compares label sequences.
#[derive(Clone)]
pub struct FiniteSpace {
    inner: Arc<SpaceInner>,
}

impl FiniteSpace {
    /// Builds a space from an ordered list of distinct labels.
    pub fn new<I, S>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        Self::build(labels, Vec::new())
    }

    /// Space with labels `prefix0`, `prefix1`, ... `prefix{n-1}`.
    pub fn indexed(prefix: &str, n: usize) -> Result<Self> {
        Self::new((0..n).map(|i| format!("{prefix}{i}")))
    }

    /// Declared product of two spaces, row-major point order, labels `"(a,b)"`.
    pub fn product(first: &FiniteSpace, second: &FiniteSpace) -> Result<Self> {
        let mut labels = Vec::with_capacity(first.size() * second.size());
        for a in first.labels() {
            for b in second.labels() {
                labels.push(format!("({a},{b})"));
            }
        }
        Self::build(labels, vec![first.clone(), second.clone()])
    }

    fn build(labels: Vec<String>, factors: Vec<FiniteSpace>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::EmptySpace);
        }
        let mut index = HashMap::with_capacity(labels.len());
        for (i, label) in labels.iter().enumerate() {
            if index.insert(label.clone(), i).is_some() {
                return Err(Error::DuplicateLabel(label.clone()));
            }
        }
        Ok(Self {
            inner: Arc::new(SpaceInner {
                labels,
                index,
                factors,
            }),
        })
    }

    pub fn size(&self) -> usize {
        self.inner.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.inner.labels
    }

    pub fn label(&self, index: usize) -> &str {
        &self.inner.labels[index]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.inner.index.get(label).copied()
    }

    /// Declared factorization, if this space was built as a product.
    pub fn factors(&self) -> Option<&[FiniteSpace]> {
        if self.inner.factors.is_empty() {
            None
        } else {
            Some(&self.inner.factors)
        }
    }

    /// Row-major index of the pair `(i, j)` in a two-factor product.
    pub fn pair_index(&self, i: usize, j: usize) -> Result<usize> {
        match self.factors() {
            Some([a, b]) => {
                if i >= a.size() {
                    return Err(Error::IndexOutOfRange {
                        index: i,
                        size: a.size(),
                    });
                }
                if j >= b.size() {
                    return Err(Error::IndexOutOfRange {
                        index: j,
                        size: b.size(),
                    });
                }
                Ok(i * b.size() + j)
            }
            _ => Err(Error::NotProductSpace(format!(
                "space `{self}` does not factor into two spaces"
            ))),
        }
    }

    /// Checks a point index against the size.
    pub fn check_index(&self, index: usize) -> Result<()> {
        if index < self.size() {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange {
                index,
                size: self.size(),
            })
        }
    }

    pub(crate) fn expect_same(&self, other: &FiniteSpace, context: &str) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::SpaceMismatch(format!(
                "{context}: expected `{self}`, found `{other}`"
            )))
        }
    }
}

impl PartialEq for FiniteSpace {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner) || self.inner.labels == other.inner.labels
    }
}

impl Eq for FiniteSpace {}

impl fmt::Display for FiniteSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.labels().join(", "))
    }
}

impl fmt::Debug for FiniteSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FiniteSpace")
            .field("labels", &self.inner.labels)
            .finish()
    }
}

/// A subset of the points of a space, stored as a membership mask.
#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    space: FiniteSpace,
    members: Vec<bool>,
}

impl Event {
    pub fn new(space: FiniteSpace, members: Vec<bool>) -> Result<Self> {
        if members.len() != space.size() {
            return Err(Error::ShapeMismatch(format!(
                "event mask has {} entries for a space of size {}",
                members.len(),
                space.size()
            )));
        }
        Ok(Self { space, members })
    }

    pub fn full(space: FiniteSpace) -> Self {
        let members = vec![true; space.size()];
        Self { space, members }
    }

    pub fn empty(space: FiniteSpace) -> Self {
        let members = vec![false; space.size()];
        Self { space, members }
    }

    pub fn singleton(space: FiniteSpace, index: usize) -> Result<Self> {
        space.check_index(index)?;
        let mut members = vec![false; space.size()];
        members[index] = true;
        Ok(Self { space, members })
    }

    pub fn from_indices(space: FiniteSpace, indices: &[usize]) -> Result<Self> {
        let mut members = vec![false; space.size()];
        for &i in indices {
            space.check_index(i)?;
            members[i] = true;
        }
        Ok(Self { space, members })
    }

    pub fn from_labels<S: AsRef<str>>(space: FiniteSpace, labels: &[S]) -> Result<Self> {
        let mut members = vec![false; space.size()];
        for label in labels {
            let label = label.as_ref();
            let i = space
                .index_of(label)
                .ok_or_else(|| Error::UnknownLabel(label.to_string()))?;
            members[i] = true;
        }
        Ok(Self { space, members })
    }

    /// Rectangle `B1 x B2` inside a declared two-factor product space.
    pub fn rectangle(space: FiniteSpace, first: &Event, second: &Event) -> Result<Self> {
        let Some([a, b]) = space.factors() else {
            return Err(Error::NotProductSpace(format!(
                "rectangle events need a two-factor space, got `{space}`"
            )));
        };
        a.expect_same(first.space(), "rectangle first factor")?;
        b.expect_same(second.space(), "rectangle second factor")?;
        let mut members = vec![false; space.size()];
        for i in 0..a.size() {
            for j in 0..b.size() {
                members[i * b.size() + j] = first.contains(i) && second.contains(j);
            }
        }
        Ok(Self { space, members })
    }

    pub fn space(&self) -> &FiniteSpace {
        &self.space
    }

    pub fn contains(&self, index: usize) -> bool {
        self.members.get(index).copied().unwrap_or(false)
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.members
            .iter()
            .enumerate()
            .filter_map(|(i, &m)| m.then_some(i))
    }

    pub fn labels(&self) -> Vec<String> {
        self.indices()
            .map(|i| self.space.label(i).to_string())
            .collect()
    }

    pub fn count(&self) -> usize {
        self.members.iter().filter(|&&m| m).count()
    }

    pub fn is_empty(&self) -> bool {
        self.count() == 0
    }

    pub fn is_full(&self) -> bool {
        self.count() == self.space.size()
    }

    pub fn complement(&self) -> Event {
        Event {
            space: self.space.clone(),
            members: self.members.iter().map(|&m| !m).collect(),
        }
    }

    pub fn union(&self, other: &Event) -> Result<Event> {
        self.space.expect_same(other.space(), "event union")?;
        let members = self
            .members
            .iter()
            .zip(&other.members)
            .map(|(&a, &b)| a || b)
            .collect();
        Ok(Event {
            space: self.space.clone(),
            members,
        })
    }

    pub fn intersection(&self, other: &Event) -> Result<Event> {
        self.space
            .expect_same(other.space(), "event intersection")?;
        let members = self
            .members
            .iter()
            .zip(&other.members)
            .map(|(&a, &b)| a && b)
            .collect();
        Ok(Event {
            space: self.space.clone(),
            members,
        })
    }

    pub fn is_disjoint(&self, other: &Event) -> bool {
        self.members
            .iter()
            .zip(&other.members)
            .all(|(&a, &b)| !(a && b))
    }
}
