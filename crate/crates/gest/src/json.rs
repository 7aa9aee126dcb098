//! JSON interchange for story graphs and matcher configs.
//!
//! The wire layout is fixed: events carry `id`, `action`, `entities`,
//! `location`, `timeframe{label,order}`, `properties`, `refs`;
//! relations carry `src`, `dst`, `kind`, `verb`. Graphs with collapsed
//! events additionally carry a `payloads` array (omitted when empty,
//! so flat graphs round-trip through other tooling untouched).

use std::collections::BTreeMap;

use gest_core::matching::MatchConfig;
use gest_core::model::{
    AbstractionPayload, BoundaryEdge, BoundaryRef, Direction, Event, EventRef, GestGraph,
    RefKind, Relation, RelationKind, Timeframe,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum JsonError {
    #[error("json: {0}")]
    Syntax(#[from] serde_json::Error),
    #[error("unknown {what} kind '{value}'")]
    UnknownKind { what: &'static str, value: String },
    #[error("duplicate event id '{0}'")]
    DuplicateEvent(String),
    #[error("duplicate payload id '{0}'")]
    DuplicatePayload(String),
}

#[derive(Debug, Serialize, Deserialize)]
struct GraphJson {
    events: Vec<EventJson>,
    relations: Vec<RelationJson>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    payloads: Vec<PayloadJson>,
}

#[derive(Debug, Serialize, Deserialize)]
struct EventJson {
    id: String,
    action: String,
    #[serde(default)]
    entities: Vec<String>,
    #[serde(default)]
    location: Option<String>,
    #[serde(default)]
    timeframe: TimeframeJson,
    #[serde(default)]
    properties: BTreeMap<String, String>,
    #[serde(default)]
    refs: Vec<RefJson>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
struct TimeframeJson {
    label: Option<String>,
    order: Option<i64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct RefJson {
    path: String,
    target: String,
    kind: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct RelationJson {
    src: String,
    dst: String,
    kind: String,
    #[serde(default)]
    verb: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct PayloadJson {
    id: String,
    subgraph: GraphJson,
    boundary_edges: Vec<BoundaryEdgeJson>,
    boundary_refs: Vec<BoundaryRefJson>,
}

#[derive(Debug, Serialize, Deserialize)]
struct BoundaryEdgeJson {
    direction: String,
    external: String,
    interior: String,
    kind: String,
    verb: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
struct BoundaryRefJson {
    external: String,
    path: String,
    kind: String,
    interior: String,
}

fn graph_to_wire(g: &GestGraph) -> GraphJson {
    GraphJson {
        events: g
            .events()
            .map(|e| EventJson {
                id: e.id.as_str().to_string(),
                action: e.action.clone(),
                entities: e.entities.clone(),
                location: e.location.clone(),
                timeframe: TimeframeJson {
                    label: e.timeframe.label.clone(),
                    order: e.timeframe.order,
                },
                properties: e.properties.clone(),
                refs: e
                    .refs
                    .iter()
                    .map(|r| RefJson {
                        path: r.path.clone(),
                        target: r.target.as_str().to_string(),
                        kind: r.kind.as_str().to_string(),
                    })
                    .collect(),
            })
            .collect(),
        relations: g
            .relations()
            .iter()
            .map(|r| RelationJson {
                src: r.src.as_str().to_string(),
                dst: r.dst.as_str().to_string(),
                kind: r.kind.as_str().to_string(),
                verb: r.verb.clone(),
            })
            .collect(),
        payloads: g
            .payloads()
            .map(|(id, p)| PayloadJson {
                id: id.as_str().to_string(),
                subgraph: graph_to_wire(&p.subgraph),
                boundary_edges: p
                    .boundary_edges
                    .iter()
                    .map(|b| BoundaryEdgeJson {
                        direction: match b.direction {
                            Direction::In => "in".to_string(),
                            Direction::Out => "out".to_string(),
                        },
                        external: b.external.as_str().to_string(),
                        interior: b.interior.as_str().to_string(),
                        kind: b.kind.as_str().to_string(),
                        verb: b.verb.clone(),
                    })
                    .collect(),
                boundary_refs: p
                    .boundary_refs
                    .iter()
                    .map(|b| BoundaryRefJson {
                        external: b.external.as_str().to_string(),
                        path: b.path.clone(),
                        kind: b.kind.as_str().to_string(),
                        interior: b.interior.as_str().to_string(),
                    })
                    .collect(),
            })
            .collect(),
    }
}

fn ref_kind(value: &str) -> Result<RefKind, JsonError> {
    RefKind::parse(value).ok_or_else(|| JsonError::UnknownKind {
        what: "ref",
        value: value.to_string(),
    })
}

fn relation_kind(value: &str) -> Result<RelationKind, JsonError> {
    RelationKind::parse(value).ok_or_else(|| JsonError::UnknownKind {
        what: "relation",
        value: value.to_string(),
    })
}

fn wire_to_graph(wire: GraphJson) -> Result<GestGraph, JsonError> {
    let mut g = GestGraph::new();
    for e in wire.events {
        let mut event = Event::new(e.id.clone(), e.action);
        event.entities = e.entities;
        event.location = e.location;
        event.timeframe = Timeframe {
            label: e.timeframe.label,
            order: e.timeframe.order,
        };
        event.properties = e.properties;
        for r in e.refs {
            event.refs.push(EventRef {
                path: r.path,
                kind: ref_kind(&r.kind)?,
                target: r.target.into(),
            });
        }
        if g.insert_event(event).is_some() {
            return Err(JsonError::DuplicateEvent(e.id));
        }
    }
    for r in wire.relations {
        g.insert_relation(Relation {
            src: r.src.into(),
            dst: r.dst.into(),
            kind: relation_kind(&r.kind)?,
            verb: r.verb,
        });
    }
    for p in wire.payloads {
        let payload = AbstractionPayload {
            subgraph: wire_to_graph(p.subgraph)?,
            boundary_edges: p
                .boundary_edges
                .into_iter()
                .map(|b| {
                    Ok(BoundaryEdge {
                        direction: match b.direction.as_str() {
                            "in" => Direction::In,
                            "out" => Direction::Out,
                            other => {
                                return Err(JsonError::UnknownKind {
                                    what: "direction",
                                    value: other.to_string(),
                                })
                            }
                        },
                        external: b.external.into(),
                        interior: b.interior.into(),
                        kind: relation_kind(&b.kind)?,
                        verb: b.verb,
                    })
                })
                .collect::<Result<_, JsonError>>()?,
            boundary_refs: p
                .boundary_refs
                .into_iter()
                .map(|b| {
                    Ok(BoundaryRef {
                        external: b.external.into(),
                        path: b.path,
                        kind: ref_kind(&b.kind)?,
                        interior: b.interior.into(),
                    })
                })
                .collect::<Result<_, JsonError>>()?,
        };
        if g.set_payload(p.id.clone(), payload).is_some() {
            return Err(JsonError::DuplicatePayload(p.id));
        }
    }
    Ok(g)
}

/// Pretty-printed JSON for a graph, with stable field and key order.
pub fn graph_to_json(g: &GestGraph) -> String {
    serde_json::to_string_pretty(&graph_to_wire(g)).expect("graph wire form always serializes")
}

pub fn graph_from_json(text: &str) -> Result<GestGraph, JsonError> {
    wire_to_graph(serde_json::from_str(text)?)
}

/// Matcher config as JSON, all fields spelled out.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MatchConfigJson {
    pub w_action: f64,
    pub w_entities: f64,
    pub w_location: f64,
    pub w_time: f64,
    pub w_props: f64,
    pub alpha_rel: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub max_candidates: usize,
    pub refs_as_edges: bool,
}

impl Default for MatchConfigJson {
    fn default() -> Self {
        MatchConfig::default().into()
    }
}

impl From<MatchConfig> for MatchConfigJson {
    fn from(c: MatchConfig) -> Self {
        MatchConfigJson {
            w_action: c.w_action,
            w_entities: c.w_entities,
            w_location: c.w_location,
            w_time: c.w_time,
            w_props: c.w_props,
            alpha_rel: c.alpha_rel,
            tol: c.tol,
            max_iter: c.max_iter,
            max_candidates: c.max_candidates,
            refs_as_edges: c.refs_as_edges,
        }
    }
}

impl From<MatchConfigJson> for MatchConfig {
    fn from(c: MatchConfigJson) -> Self {
        MatchConfig {
            w_action: c.w_action,
            w_entities: c.w_entities,
            w_location: c.w_location,
            w_time: c.w_time,
            w_props: c.w_props,
            alpha_rel: c.alpha_rel,
            tol: c.tol,
            max_iter: c.max_iter,
            max_candidates: c.max_candidates,
            refs_as_edges: c.refs_as_edges,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use gest_core::model::EventId;

    fn sample() -> GestGraph {
        let mut g = GestGraph::new();
        g.insert_event(
            Event::new("e1", "open")
                .with_entities(["john", "door"])
                .with_location("kitchen")
                .with_time_label("morning")
                .with_property("speed", "slow"),
        );
        g.insert_event(
            Event::new("e2", "eat").with_ref("entities[0]", RefKind::SameEntity, "e1"),
        );
        g.insert_relation(Relation::new("e1", "e2", RelationKind::Next));
        g.insert_relation(Relation::other("e1", "e2", "avoid"));
        g
    }

    #[test]
    fn json_round_trip() {
        let g = sample();
        let text = graph_to_json(&g);
        assert_eq!(graph_from_json(&text).unwrap(), g);
    }

    #[test]
    fn json_field_names_are_exact() {
        let g = sample();
        let v: serde_json::Value = serde_json::from_str(&graph_to_json(&g)).unwrap();
        let e = &v["events"][0];
        for key in ["id", "action", "entities", "location", "timeframe", "properties", "refs"] {
            assert!(e.get(key).is_some(), "missing event key {key}");
        }
        assert_eq!(e["timeframe"]["label"], "morning");
        assert_eq!(v["events"][1]["location"], serde_json::Value::Null);
        let r = &v["relations"][0];
        for key in ["src", "dst", "kind", "verb"] {
            assert!(r.get(key).is_some(), "missing relation key {key}");
        }
        assert_eq!(v["relations"][1]["kind"], "other");
        assert_eq!(v["relations"][1]["verb"], "avoid");
        assert_eq!(v["events"][1]["refs"][0]["kind"], "same_entity");
        // Flat graphs carry no payload key at all.
        assert!(v.get("payloads").is_none());
    }

    #[test]
    fn collapsed_graphs_round_trip_with_payloads() {
        let g = sample();
        let c = g
            .collapse(&[EventId::new("e1"), EventId::new("e2")], "abs", "both")
            .unwrap();
        let text = graph_to_json(&c);
        let back = graph_from_json(&text).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.expand("abs").unwrap(), g);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert!(v.get("payloads").is_some());
    }

    #[test]
    fn unknown_kinds_are_rejected() {
        let bad = r#"{"events":[],"relations":[{"src":"a","dst":"b","kind":"sideways","verb":null}]}"#;
        assert!(matches!(
            graph_from_json(bad),
            Err(JsonError::UnknownKind { what: "relation", .. })
        ));
    }

    #[test]
    fn duplicate_events_are_rejected() {
        let bad = r#"{"events":[
            {"id":"e1","action":"a","entities":[],"location":null,"timeframe":{"label":null,"order":null},"properties":{},"refs":[]},
            {"id":"e1","action":"b","entities":[],"location":null,"timeframe":{"label":null,"order":null},"properties":{},"refs":[]}
        ],"relations":[]}"#;
        assert!(matches!(graph_from_json(bad), Err(JsonError::DuplicateEvent(id)) if id == "e1"));
    }

    #[test]
    fn match_config_round_trips_and_rejects_unknown_fields() {
        let cfg = MatchConfigJson::default();
        let text = serde_json::to_string(&cfg).unwrap();
        let back: MatchConfigJson = serde_json::from_str(&text).unwrap();
        assert_eq!(MatchConfig::from(back), MatchConfig::default());
        assert!(serde_json::from_str::<MatchConfigJson>("{\"w_typo\":1}").is_err());
        // Partial configs fill in defaults.
        let partial: MatchConfigJson = serde_json::from_str("{\"alpha_rel\":0.25}").unwrap();
        assert_eq!(partial.alpha_rel, 0.25);
        assert_eq!(partial.w_action, 0.4);
    }
}
