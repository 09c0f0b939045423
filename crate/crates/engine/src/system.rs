//! A closed system under execution: contracts instantiated per a
//! composition, with directed links carrying labelled events.

use std::collections::BTreeMap;

use thiserror::Error;

use sosc_core::{
    expand_instances, Contract, Envelope, ExpandError, SemType, SoSComposition, Value,
};

/// One expanded instance with its evaluated parameter valuation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub id: String,
    pub contract: String,
    pub params: BTreeMap<String, Value>,
}

/// A resolved directed connection between two instances.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Link {
    pub from: usize,
    pub to: usize,
    pub from_port: String,
    pub to_port: String,
    pub labels: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct System {
    pub name: String,
    pub contracts: BTreeMap<String, Contract>,
    pub instances: Vec<Instance>,
    pub links: Vec<Link>,
    /// Timeout constants shared by every machine, in abstract ticks.
    pub timeouts: BTreeMap<String, u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BuildError {
    #[error("instance `{0}` references unknown contract `{1}`")]
    UnknownContract(String, String),
    #[error(transparent)]
    Expand(#[from] ExpandError),
    #[error("instance `{instance}`: contract `{contract}` expects {expected} parameter(s), got {got}")]
    Arity { instance: String, contract: String, expected: usize, got: usize },
    #[error("instance `{instance}`: parameter `{param}` expects {expected}, got {got}")]
    ParamType { instance: String, param: String, expected: &'static str, got: String },
    #[error("duplicate instance id `{0}` after expansion")]
    Duplicate(String),
    #[error("connection endpoint `{0}` does not name an instance")]
    UnknownEndpoint(String),
}

fn value_fits(ty: SemType, v: &Value) -> bool {
    matches!(
        (ty, v),
        (SemType::Int, Value::Int(_)) | (SemType::Bool, Value::Bool(_)) | (SemType::Msg, Value::Msg(_))
    ) || matches!((ty, v), (SemType::Msg, Value::Unit))
}

impl System {
    pub fn build(
        contracts: &[Contract],
        composition: &SoSComposition,
        timeouts: BTreeMap<String, u64>,
    ) -> Result<System, BuildError> {
        let by_name: BTreeMap<String, Contract> =
            contracts.iter().map(|c| (c.name.clone(), c.clone())).collect();

        let mut instances = Vec::new();
        for ri in expand_instances(composition)? {
            let contract = by_name
                .get(&ri.contract)
                .ok_or_else(|| BuildError::UnknownContract(ri.id.clone(), ri.contract.clone()))?;
            if contract.params.len() != ri.actuals.len() {
                return Err(BuildError::Arity {
                    instance: ri.id,
                    contract: ri.contract,
                    expected: contract.params.len(),
                    got: ri.actuals.len(),
                });
            }
            let mut params = BTreeMap::new();
            for (p, v) in contract.params.iter().zip(ri.actuals) {
                if !value_fits(p.ty, &v) {
                    return Err(BuildError::ParamType {
                        instance: ri.id,
                        param: p.name.clone(),
                        expected: p.ty.name(),
                        got: format!("{v:?}"),
                    });
                }
                params.insert(p.name.clone(), v);
            }
            if instances.iter().any(|i: &Instance| i.id == ri.id) {
                return Err(BuildError::Duplicate(ri.id));
            }
            instances.push(Instance { id: ri.id, contract: ri.contract, params });
        }

        let index_of = |id: &str| -> Result<usize, BuildError> {
            instances
                .iter()
                .position(|i| i.id == id)
                .ok_or_else(|| BuildError::UnknownEndpoint(id.to_string()))
        };
        let mut links = Vec::new();
        for c in &composition.connections {
            links.push(Link {
                from: index_of(&c.from.instance)?,
                to: index_of(&c.to.instance)?,
                from_port: c.from.port.clone(),
                to_port: c.to.port.clone(),
                labels: c.labels.clone(),
            });
        }

        Ok(System {
            name: composition.name.clone(),
            contracts: by_name,
            instances,
            links,
            timeouts,
        })
    }

    pub fn contract_of(&self, instance: usize) -> &Contract {
        &self.contracts[&self.instances[instance].contract]
    }

    pub fn instance_index(&self, id: &str) -> Option<usize> {
        self.instances.iter().position(|i| i.id == id)
    }

    fn int_param(&self, instance: usize, name: &str) -> Option<i64> {
        match self.instances[instance].params.get(name) {
            Some(Value::Int(n)) => Some(*n),
            _ => None,
        }
    }

    /// Links leaving `from` that carry `label`.
    pub fn carrying_links(&self, from: usize, label: &str) -> Vec<usize> {
        self.links
            .iter()
            .enumerate()
            .filter(|(_, l)| l.from == from && l.labels.iter().any(|x| x == label))
            .map(|(i, _)| i)
            .collect()
    }

    /// Resolves a single emission to at most one link. With several
    /// carrying links the payload must be an addressed message; the
    /// receiver is then chosen by matching instance identity
    /// parameters, in three tiers:
    /// 1. the destination itself (`myId` equals the destination, and a
    ///    `yrId`, when declared, equals the source);
    /// 2. a proxy acting for the sender toward the destination
    ///    (`myId` equals the source and `yrId` the destination);
    /// 3. a carrier with no identity of its own (no `myId`).
    pub fn route_emission(
        &self,
        from: usize,
        label: &str,
        value: &Value,
    ) -> Result<Option<usize>, RouteError> {
        let candidates = self.carrying_links(from, label);
        match candidates.len() {
            0 => return Ok(None),
            1 => return Ok(Some(candidates[0])),
            _ => {}
        }
        let Value::Msg(env) = value else {
            return Err(RouteError::NeedsEnvelope {
                instance: self.instances[from].id.clone(),
                label: label.to_string(),
            });
        };
        for tier in 0..3 {
            let hits: Vec<usize> = candidates
                .iter()
                .copied()
                .filter(|&l| self.tier_matches(tier, self.links[l].to, env))
                .collect();
            match hits.len() {
                0 => continue,
                1 => return Ok(Some(hits[0])),
                _ => break,
            }
        }
        Err(RouteError::Ambiguous {
            instance: self.instances[from].id.clone(),
            label: label.to_string(),
        })
    }

    fn tier_matches(&self, tier: u8, to: usize, env: &Envelope) -> bool {
        let my = self.int_param(to, "myId");
        let yr = self.int_param(to, "yrId");
        match tier {
            0 => my == Some(env.dst) && yr.map(|y| y == env.src).unwrap_or(true),
            1 => my == Some(env.src) && yr == Some(env.dst),
            _ => my.is_none(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RouteError {
    #[error("instance `{instance}`: several links carry `{label}` but the payload is not an addressed message")]
    NeedsEnvelope { instance: String, label: String },
    #[error("instance `{instance}`: no unique link for `{label}` after identity matching")]
    Ambiguous { instance: String, label: String },
}
