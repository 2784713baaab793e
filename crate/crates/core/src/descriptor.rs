//! Descriptor data model and the vector kernels shared by every stage.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{dot_f64, sq_dist_f64, sq_norm_f64, Scalar};

/// Largest dimension allowed for a final (fused) descriptor.
pub const MAX_FINAL_DIM: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Query,
    Reference,
    Training,
}

impl Role {
    pub fn to_byte(self) -> u8 {
        match self {
            Role::Query => 0,
            Role::Reference => 1,
            Role::Training => 2,
        }
    }

    pub fn from_byte(b: u8) -> Option<Self> {
        match b {
            0 => Some(Role::Query),
            1 => Some(Role::Reference),
            2 => Some(Role::Training),
            _ => None,
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::Query => "query",
            Role::Reference => "reference",
            Role::Training => "training",
        })
    }
}

impl FromStr for Role {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "query" => Ok(Role::Query),
            "reference" => Ok(Role::Reference),
            "training" => Ok(Role::Training),
            other => Err(Error::InvalidParam(format!("unknown role {other:?}"))),
        }
    }
}

/// An image id and its descriptor vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Descriptor<T> {
    pub id: String,
    pub vector: Vec<T>,
}

impl<T: Scalar> Descriptor<T> {
    pub fn new(id: impl Into<String>, vector: Vec<T>) -> Self {
        Self {
            id: id.into(),
            vector,
        }
    }
}

/// Immutable, homogeneous collection of descriptors sharing one role and
/// dimension. Vectors are stored contiguously in row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct DescriptorSet<T> {
    role: Role,
    dim: usize,
    ids: Vec<String>,
    data: Vec<T>,
}

impl<T: Scalar> DescriptorSet<T> {
    /// Builds a set from ids and a row-major buffer of `ids.len() * dim`
    /// values. Rejects duplicate ids, non-finite values and `dim == 0`.
    pub fn from_parts(role: Role, dim: usize, ids: Vec<String>, data: Vec<T>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParam("descriptor dimension must be positive".into()));
        }
        if data.len() != ids.len() * dim {
            return Err(Error::DimMismatch {
                expected: ids.len() * dim,
                found: data.len(),
            });
        }
        let mut seen = HashSet::with_capacity(ids.len());
        for id in &ids {
            if !seen.insert(id.as_str()) {
                return Err(Error::DuplicateId(id.clone()));
            }
        }
        for (i, row) in data.chunks_exact(dim).enumerate() {
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite(Some(ids[i].clone())));
            }
        }
        Ok(Self {
            role,
            dim,
            ids,
            data,
        })
    }

    pub fn from_descriptors(role: Role, entries: Vec<Descriptor<T>>) -> Result<Self> {
        let dim = entries
            .first()
            .map(|d| d.vector.len())
            .ok_or(Error::Empty("descriptor set"))?;
        let mut ids = Vec::with_capacity(entries.len());
        let mut data = Vec::with_capacity(entries.len() * dim);
        for d in entries {
            if d.vector.len() != dim {
                return Err(Error::DimMismatch {
                    expected: dim,
                    found: d.vector.len(),
                });
            }
            ids.push(d.id);
            data.extend(d.vector);
        }
        Self::from_parts(role, dim, ids, data)
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn id(&self, i: usize) -> &str {
        &self.ids[i]
    }

    pub fn vector(&self, i: usize) -> &[T] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    /// Row-major backing buffer.
    pub fn as_flat(&self) -> &[T] {
        &self.data
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = (&str, &[T])> + '_ {
        self.ids
            .iter()
            .map(String::as_str)
            .zip(self.data.chunks_exact(self.dim))
    }

    pub fn to_descriptors(&self) -> Vec<Descriptor<T>> {
        self.iter()
            .map(|(id, v)| Descriptor::new(id, v.to_vec()))
            .collect()
    }

    /// Same data under a different role.
    pub fn with_role(mut self, role: Role) -> Self {
        self.role = role;
        self
    }

    /// Converts the storage scalar type.
    pub fn cast<U: Scalar>(&self) -> DescriptorSet<U> {
        DescriptorSet {
            role: self.role,
            dim: self.dim,
            ids: self.ids.clone(),
            data: self.data.iter().map(|v| U::narrow(v.widen())).collect(),
        }
    }

    /// Returns an error naming the first zero vector, if any.
    pub fn reject_zero_vectors(&self) -> Result<()> {
        for (id, v) in self.iter() {
            if v.iter().all(|x| x.is_zero()) {
                return Err(Error::ZeroVector(Some(id.to_owned())));
            }
        }
        Ok(())
    }

    /// Reorders entries to follow `order`, which must be a permutation of
    /// this set's ids.
    pub fn reorder(&self, order: &[String]) -> Result<Self> {
        if order.len() != self.len() {
            return Err(Error::DimMismatch {
                expected: self.len(),
                found: order.len(),
            });
        }
        let index: HashMap<&str, usize> = self
            .ids
            .iter()
            .enumerate()
            .map(|(i, id)| (id.as_str(), i))
            .collect();
        let mut data = Vec::with_capacity(self.data.len());
        for id in order {
            let i = *index
                .get(id.as_str())
                .ok_or_else(|| Error::UnknownId(id.clone()))?;
            data.extend_from_slice(self.vector(i));
        }
        Self::from_parts(self.role, self.dim, order.to_vec(), data)
    }

    /// Reorders entries to follow the id order of `other`.
    pub fn reorder_like<U: Scalar>(&self, other: &DescriptorSet<U>) -> Result<Self> {
        self.reorder(other.ids())
    }

    pub(crate) fn map_rows<F>(&self, role: Role, mut f: F) -> Result<Self>
    where
        F: FnMut(usize, &str, &[T]) -> Result<Vec<T>>,
    {
        let mut data = Vec::with_capacity(self.data.len());
        for (i, (id, v)) in self.iter().enumerate() {
            let out = f(i, id, v)?;
            debug_assert_eq!(out.len(), self.dim);
            data.extend(out);
        }
        Self::from_parts(role, self.dim, self.ids.clone(), data)
    }
}

fn check_dims(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::DimMismatch {
            expected: a,
            found: b,
        });
    }
    Ok(())
}

/// Scales `v` to unit Euclidean length.
pub fn l2_normalize<T: Scalar>(v: &[T]) -> Result<Vec<T>> {
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite(None));
    }
    let norm = sq_norm_f64(v).sqrt();
    if norm == 0.0 {
        return Err(Error::ZeroVector(None));
    }
    Ok(v.iter().map(|x| T::narrow(x.widen() / norm)).collect())
}

pub fn l2_norm<T: Scalar>(v: &[T]) -> f64 {
    sq_norm_f64(v).sqrt()
}

/// `‖a − b‖₂`, accumulated in `f64`.
pub fn euclidean_distance<T: Scalar>(a: &[T], b: &[T]) -> Result<f64> {
    check_dims(a.len(), b.len())?;
    Ok(sq_dist_f64(a, b).sqrt())
}

pub fn inner_product<T: Scalar>(a: &[T], b: &[T]) -> Result<f64> {
    check_dims(a.len(), b.len())?;
    Ok(dot_f64(a, b))
}
