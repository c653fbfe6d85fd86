//! Monoidal signatures: generating objects and generating morphisms.
//!
//! Objects of the free strict monoidal category are [`Word`]s over the
//! declared object names; the empty word is the monoidal unit.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Name of a generating object. Nonempty, drawn from `[A-Za-z0-9_]`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ObjectName(String);

impl ObjectName {
    /// Builds a name, returning `None` when it is empty or uses characters
    /// outside `[A-Za-z0-9_]`.
    pub fn new(name: impl Into<String>) -> Option<Self> {
        let name = name.into();
        if is_valid_object_name(&name) {
            Some(ObjectName(name))
        } else {
            None
        }
    }

    /// Builds a name without validating it. [`validate_signature`] reports
    /// malformed names as `invalid-object-name`.
    pub fn new_unchecked(name: impl Into<String>) -> Self {
        ObjectName(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ObjectName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

pub fn is_valid_object_name(name: &str) -> bool {
    !name.is_empty() && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// An object of the free monoidal category: a (possibly empty) list of
/// generating objects.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Word(Vec<ObjectName>);

impl Word {
    /// The monoidal unit.
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn new(objects: Vec<ObjectName>) -> Self {
        Word(objects)
    }

    /// Convenience constructor for tests and examples. Panics on malformed
    /// names.
    pub fn from_names<I, S>(names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Word(
            names
                .into_iter()
                .map(|n| {
                    let n = n.into();
                    ObjectName::new(n.clone()).unwrap_or_else(|| panic!("invalid object name {n:?}"))
                })
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn objects(&self) -> &[ObjectName] {
        &self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, ObjectName> {
        self.0.iter()
    }

    /// Splits into the first `at` objects and the rest.
    pub fn split_at(&self, at: usize) -> (Word, Word) {
        let (a, b) = self.0.split_at(at);
        (Word(a.to_vec()), Word(b.to_vec()))
    }

    pub fn slice(&self, range: std::ops::Range<usize>) -> Word {
        Word(self.0[range].to_vec())
    }
}

/// Monoidal product of words: concatenation. The empty word is a two-sided
/// unit.
pub fn word_concat(u: &Word, v: &Word) -> Word {
    let mut out = Vec::with_capacity(u.len() + v.len());
    out.extend_from_slice(&u.0);
    out.extend_from_slice(&v.0);
    Word(out)
}

impl fmt::Display for Word {
    /// Space separated names; the empty word prints as `ε`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("ε");
        }
        for (i, o) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{o}")?;
        }
        Ok(())
    }
}

impl<'a> IntoIterator for &'a Word {
    type Item = &'a ObjectName;
    type IntoIter = std::slice::Iter<'a, ObjectName>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

impl FromIterator<ObjectName> for Word {
    fn from_iter<T: IntoIterator<Item = ObjectName>>(iter: T) -> Self {
        Word(iter.into_iter().collect())
    }
}

/// A generating morphism `name : dom → cod`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Generator {
    pub name: String,
    pub dom: Word,
    pub cod: Word,
}

impl Generator {
    pub fn new(name: impl Into<String>, dom: Word, cod: Word) -> Self {
        Generator {
            name: name.into(),
            dom,
            cod,
        }
    }
}

/// Generating objects and morphisms. Declaration order is kept so that
/// serialization and seeded binding generation are stable.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Signature {
    objects: Vec<ObjectName>,
    generators: Vec<Generator>,
}

impl Signature {
    pub fn new(objects: Vec<ObjectName>, generators: Vec<Generator>) -> Self {
        Signature { objects, generators }
    }

    pub fn objects(&self) -> &[ObjectName] {
        &self.objects
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn generator(&self, name: &str) -> Option<&Generator> {
        self.generators.iter().find(|g| g.name == name)
    }

    pub fn has_object(&self, name: &ObjectName) -> bool {
        self.objects.contains(name)
    }

    pub fn push_object(&mut self, name: ObjectName) {
        self.objects.push(name);
    }

    pub fn push_generator(&mut self, generator: Generator) {
        self.generators.push(generator);
    }
}

/// Stable machine-readable violation codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ViolationCode {
    InvalidObjectName,
    DuplicateObject,
    EmptyGeneratorName,
    DuplicateGenerator,
    UndeclaredObject,
}

impl ViolationCode {
    pub fn as_str(self) -> &'static str {
        match self {
            ViolationCode::InvalidObjectName => "invalid-object-name",
            ViolationCode::DuplicateObject => "duplicate-object",
            ViolationCode::EmptyGeneratorName => "empty-generator-name",
            ViolationCode::DuplicateGenerator => "duplicate-generator",
            ViolationCode::UndeclaredObject => "undeclared-object",
        }
    }
}

impl fmt::Display for ViolationCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub code: ViolationCode,
    /// Where the violation sits, e.g. `objects[2]` or `generators[0].dom[1]`.
    pub location: String,
    pub message: String,
}

/// Checks every signature invariant, returning all violations found.
pub fn validate_signature(sig: &Signature) -> Result<(), Vec<Violation>> {
    let mut violations = Vec::new();
    let mut seen = HashSet::new();
    for (i, o) in sig.objects.iter().enumerate() {
        if !is_valid_object_name(o.as_str()) {
            violations.push(Violation {
                code: ViolationCode::InvalidObjectName,
                location: format!("objects[{i}]"),
                message: format!("object name {:?} must match [A-Za-z0-9_]+", o.as_str()),
            });
        }
        if !seen.insert(o) {
            violations.push(Violation {
                code: ViolationCode::DuplicateObject,
                location: format!("objects[{i}]"),
                message: format!("object {o} declared twice"),
            });
        }
    }
    let mut names = HashSet::new();
    for (i, g) in sig.generators.iter().enumerate() {
        if g.name.is_empty() {
            violations.push(Violation {
                code: ViolationCode::EmptyGeneratorName,
                location: format!("generators[{i}].name"),
                message: "generator name must be nonempty".into(),
            });
        }
        if !names.insert(g.name.as_str()) {
            violations.push(Violation {
                code: ViolationCode::DuplicateGenerator,
                location: format!("generators[{i}].name"),
                message: format!("generator {} declared twice", g.name),
            });
        }
        for (side, word) in [("dom", &g.dom), ("cod", &g.cod)] {
            for (j, o) in word.iter().enumerate() {
                if !seen.contains(o) {
                    violations.push(Violation {
                        code: ViolationCode::UndeclaredObject,
                        location: format!("generators[{i}].{side}[{j}]"),
                        message: format!("generator {} uses undeclared object {o}", g.name),
                    });
                }
            }
        }
    }
    if violations.is_empty() {
        Ok(())
    } else {
        Err(violations)
    }
}

/// The running example: four generators on seven objects,
/// `f1: x1 → x3 x4`, `f2: x2 → x5`, `f3: x3 → x6`, `f4: x4 x5 → x7`.
pub fn running_example_signature() -> Signature {
    let objects = (1..=7).map(|i| ObjectName::new(format!("x{i}")).unwrap()).collect();
    let w = |names: &[&str]| Word::from_names(names.iter().copied());
    Signature::new(
        objects,
        vec![
            Generator::new("f1", w(&["x1"]), w(&["x3", "x4"])),
            Generator::new("f2", w(&["x2"]), w(&["x5"])),
            Generator::new("f3", w(&["x3"]), w(&["x6"])),
            Generator::new("f4", w(&["x4", "x5"]), w(&["x7"])),
        ],
    )
}
