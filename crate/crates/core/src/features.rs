//! Named fixed-length feature rows with per-entry missing values.

use std::fmt;

/// A fixed set of named features. Entries may be missing; each missing
/// entry should carry a note explaining why.
#[derive(Clone, PartialEq)]
pub struct FeatureRow<const N: usize> {
    names: &'static [&'static str; N],
    values: [Option<f64>; N],
    notes: Vec<String>,
}

impl<const N: usize> FeatureRow<N> {
    pub fn empty(names: &'static [&'static str; N]) -> Self {
        Self {
            names,
            values: [None; N],
            notes: Vec::new(),
        }
    }

    pub fn names(&self) -> &'static [&'static str; N] {
        self.names
    }

    pub fn values(&self) -> &[Option<f64>; N] {
        &self.values
    }

    fn index(&self, name: &str) -> usize {
        self.names
            .iter()
            .position(|n| *n == name)
            .unwrap_or_else(|| panic!("unknown feature {name:?}"))
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.values[self.index(name)]
    }

    /// Sets a value; non-finite values are stored as missing with a note.
    pub fn set(&mut self, name: &str, value: f64) {
        let i = self.index(name);
        if value.is_finite() {
            self.values[i] = Some(value);
        } else {
            self.values[i] = None;
            self.notes.push(format!("{name}: non-finite value"));
        }
    }

    pub fn set_missing(&mut self, name: &str, reason: impl fmt::Display) {
        let i = self.index(name);
        self.values[i] = None;
        self.notes.push(format!("{name}: {reason}"));
    }

    pub fn notes(&self) -> &[String] {
        &self.notes
    }

    pub fn missing(&self) -> Vec<&'static str> {
        self.names
            .iter()
            .zip(&self.values)
            .filter(|(_, v)| v.is_none())
            .map(|(n, _)| *n)
            .collect()
    }

    pub fn is_complete(&self) -> bool {
        self.values.iter().all(Option::is_some)
    }

    /// All values, or `None` if any entry is missing.
    pub fn complete(&self) -> Option<[f64; N]> {
        let mut out = [0.0; N];
        for (o, v) in out.iter_mut().zip(&self.values) {
            *o = (*v)?;
        }
        Some(out)
    }

    /// Human-readable reason the row is incomplete.
    pub fn missing_reason(&self) -> String {
        if self.notes.is_empty() {
            format!("missing {}", self.missing().join(", "))
        } else {
            self.notes.join("; ")
        }
    }
}

impl<const N: usize> fmt::Debug for FeatureRow<N> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut m = f.debug_map();
        for (n, v) in self.names.iter().zip(&self.values) {
            m.entry(n, v);
        }
        m.finish()
    }
}
