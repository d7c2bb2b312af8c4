//! JSON encoding of probabilistic automata.
//!
//! ```json
//! {"states": ["s", "t"],
//!  "actions": [{"name": "a", "polarity": "none"}],
//!  "transitions": [{"from": "s", "action": "a", "to": {"s": "1/8", "t": "3/8"}}],
//!  "initial": "s"}
//! ```
//!
//! Probabilities are strings `num/den` or `num` (integers are also accepted as
//! JSON numbers). Writing is canonical: distributions are listed in state
//! order and rationals in lowest terms, so `write(read(write(pa)))` is
//! byte-identical to `write(pa)`.

use std::collections::HashMap;
use std::fmt;

use serde::de::{MapAccess, Visitor};
use serde::ser::SerializeMap;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::automaton::{Action, ProbAutomaton, StateId, SubDistribution, Transition};
use crate::error::{Error, Result};
use crate::rational::Rational;

/// Distribution keyed by state name, in file order.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct NamedDistribution(pub Vec<(String, Rational)>);

impl Serialize for NamedDistribution {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}

impl<'de> Deserialize<'de> for NamedDistribution {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = NamedDistribution;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an object mapping state names to probabilities")
            }
            fn visit_map<A: MapAccess<'de>>(self, mut access: A) -> std::result::Result<Self::Value, A::Error> {
                let mut out = Vec::new();
                while let Some((k, v)) = access.next_entry::<String, Rational>()? {
                    out.push((k, v));
                }
                Ok(NamedDistribution(out))
            }
        }
        deserializer.deserialize_map(V)
    }
}

impl NamedDistribution {
    pub fn resolve(&self, index: &HashMap<&str, StateId>) -> Result<SubDistribution> {
        let mut entries = Vec::with_capacity(self.0.len());
        for (name, p) in &self.0 {
            let s = index.get(name.as_str()).ok_or_else(|| Error::UnknownState(name.clone()))?;
            if p.is_negative() {
                return Err(Error::NegativeProbability { state: name.clone(), value: p.clone() });
            }
            entries.push((*s, p.clone()));
        }
        SubDistribution::new(entries)
    }

    pub fn from_distribution(pa: &ProbAutomaton, d: &SubDistribution) -> Self {
        NamedDistribution(d.iter().map(|(s, p)| (pa.state_name(s).to_string(), p.clone())).collect())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TransitionEntry {
    pub from: String,
    pub action: String,
    pub to: NamedDistribution,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PaFile {
    pub states: Vec<String>,
    #[serde(default)]
    pub actions: Vec<Action>,
    #[serde(default)]
    pub transitions: Vec<TransitionEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<String>,
}

impl PaFile {
    pub fn from_automaton(pa: &ProbAutomaton) -> Self {
        PaFile {
            states: pa.state_names().to_vec(),
            actions: pa.actions().to_vec(),
            transitions: pa
                .transitions()
                .iter()
                .map(|t| TransitionEntry {
                    from: pa.state_name(t.source).to_string(),
                    action: t.action.clone(),
                    to: NamedDistribution::from_distribution(pa, &t.target),
                })
                .collect(),
            initial: pa.initial().map(|s| pa.state_name(s).to_string()),
        }
    }

    /// Resolves names to indices. Unknown state names are errors; everything
    /// else (mass bound, undeclared actions, duplicates) is left for
    /// [`ProbAutomaton::validate`].
    pub fn into_automaton(self) -> Result<ProbAutomaton> {
        let mut index: HashMap<&str, StateId> = HashMap::new();
        for (i, n) in self.states.iter().enumerate() {
            index.entry(n.as_str()).or_insert(StateId(i));
        }
        let lookup = |n: &str| index.get(n).copied().ok_or_else(|| Error::UnknownState(n.to_string()));
        let mut transitions = Vec::with_capacity(self.transitions.len());
        for t in &self.transitions {
            transitions.push(Transition {
                source: lookup(&t.from)?,
                action: t.action.clone(),
                target: t.to.resolve(&index)?,
            });
        }
        let initial = self.initial.as_deref().map(lookup).transpose()?;
        Ok(ProbAutomaton::new(self.states.clone(), self.actions, transitions, initial))
    }
}

pub fn read_automaton(json: &str) -> Result<ProbAutomaton> {
    let file: PaFile = serde_json::from_str(json)?;
    file.into_automaton()
}

pub fn write_automaton(pa: &ProbAutomaton) -> String {
    serde_json::to_string_pretty(&PaFile::from_automaton(pa)).expect("automaton serialises")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::automaton::Polarity;
    use crate::fixtures;
    use crate::r;

    #[test]
    fn reads_the_documented_example() {
        let json = r#"{"states":["s","s1","s2","x"],
            "actions":[{"name":"a","polarity":"none"}],
            "transitions":[{"from":"s","action":"a","to":{"s1":"1/8","s2":"3/8","x":"4/8"}}],
            "initial":"s"}"#;
        let pa = read_automaton(json).unwrap();
        assert!(pa.validate().is_empty());
        assert_eq!(pa.initial(), Some(StateId(0)));
        let t = &pa.transitions()[0];
        assert_eq!(t.target.prob(StateId(3)), r!(1, 2));
        assert_eq!(*t.target.mass(), r!(1));
    }

    #[test]
    fn polarity_defaults_to_none() {
        let pa = read_automaton(r#"{"states":["s"],"actions":[{"name":"a"},{"name":"m","polarity":"out"}]}"#).unwrap();
        assert_eq!(pa.actions()[0].polarity, Polarity::None);
        assert_eq!(pa.actions()[1].polarity, Polarity::Output);
    }

    #[test]
    fn unknown_state_is_an_error() {
        let json = r#"{"states":["s"],"actions":[{"name":"a"}],
            "transitions":[{"from":"s","action":"a","to":{"nowhere":"1"}}]}"#;
        assert!(matches!(read_automaton(json), Err(Error::UnknownState(n)) if n == "nowhere"));
    }

    #[test]
    fn malformed_model_still_loads_for_validation() {
        let json = r#"{"states":["s","u"],"actions":[{"name":"a"}],
            "transitions":[{"from":"s","action":"c","to":{"u":"5/8","s":"1/2"}}]}"#;
        let pa = read_automaton(json).unwrap();
        assert_eq!(pa.validate().len(), 2);
    }

    #[test]
    fn canonical_round_trip() {
        for pa in [fixtures::fig1(), fixtures::prio_not_post(), fixtures::fig3_left(&r!(1, 4))] {
            let text = write_automaton(&pa);
            let back = read_automaton(&text).unwrap();
            assert_eq!(write_automaton(&back), text);
            let id: Vec<_> = pa.states().collect();
            assert!(crate::automaton::isomorphic_under(&pa, &back, &id));
        }
    }
}
