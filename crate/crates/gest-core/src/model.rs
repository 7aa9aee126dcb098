//! The GEST data model: events, relations, and the story graph.
//!
//! Events are nodes; each one captures an action together with the
//! entities involved, where and when it happens, and free-form
//! properties. Relations are directed, typed edges expressing temporal
//! or causal structure. A graph may also carry abstraction payloads:
//! collapsed subgraphs remembered by their replacement event so the
//! abstraction can be expanded again (see [`crate::hierarchy`]).

use alloc::borrow::Borrow;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::string::ToString;
use alloc::vec::Vec;
use core::fmt;

/// Identifier of an event, unique within a graph.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EventId(String);

impl EventId {
    pub fn new(id: impl Into<String>) -> Self {
        EventId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for EventId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for EventId {
    fn from(s: &str) -> Self {
        EventId(s.to_string())
    }
}

impl From<String> for EventId {
    fn from(s: String) -> Self {
        EventId(s)
    }
}

impl Borrow<str> for EventId {
    fn borrow(&self) -> &str {
        &self.0
    }
}

/// When an event takes place: a free-form label, a position in the
/// story's event order, or both.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord)]
pub struct Timeframe {
    pub label: Option<String>,
    pub order: Option<i64>,
}

impl Timeframe {
    pub fn is_empty(&self) -> bool {
        self.label.is_none() && self.order.is_none()
    }
}

/// What a cross-event reference identifies in its target event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RefKind {
    SameEntity,
    SameLocation,
    SameTime,
    SameEvent,
}

impl RefKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RefKind::SameEntity => "same_entity",
            RefKind::SameLocation => "same_location",
            RefKind::SameTime => "same_time",
            RefKind::SameEvent => "same_event",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "same_entity" => RefKind::SameEntity,
            "same_location" => RefKind::SameLocation,
            "same_time" => RefKind::SameTime,
            "same_event" => RefKind::SameEvent,
            _ => return None,
        })
    }
}

impl fmt::Display for RefKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A coreference from a component of one event to another event, e.g.
/// "the `he` in `entities[0]` is the same entity as in event `e1`".
///
/// `path` names the referring component within the owning event
/// (`entities[0]`, `location`, `timeframe`, `action`).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct EventRef {
    pub path: String,
    pub kind: RefKind,
    pub target: EventId,
}

/// The type of a directed relation between two events.
///
/// `Other` covers verb-mediated relations that are not part of the
/// closed temporal/causal set; the verb itself is stored on the
/// [`Relation`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RelationKind {
    Next,
    Before,
    After,
    SameTime,
    Causes,
    CausedBy,
    Enables,
    Other,
}

impl RelationKind {
    pub fn as_str(self) -> &'static str {
        match self {
            RelationKind::Next => "next",
            RelationKind::Before => "before",
            RelationKind::After => "after",
            RelationKind::SameTime => "same_time",
            RelationKind::Causes => "causes",
            RelationKind::CausedBy => "caused_by",
            RelationKind::Enables => "enables",
            RelationKind::Other => "other",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "next" => RelationKind::Next,
            "before" => RelationKind::Before,
            "after" => RelationKind::After,
            "same_time" => RelationKind::SameTime,
            "causes" => RelationKind::Causes,
            "caused_by" => RelationKind::CausedBy,
            "enables" => RelationKind::Enables,
            "other" => RelationKind::Other,
            _ => return None,
        })
    }

    /// Temporal-order relations, the ones that must stay acyclic.
    pub fn is_temporal(self) -> bool {
        matches!(
            self,
            RelationKind::Next | RelationKind::Before | RelationKind::After
        )
    }

    /// The same relation viewed from the other endpoint, when the set
    /// defines one (`before`/`after`, `causes`/`caused_by`).
    pub fn inverse(self) -> Option<Self> {
        Some(match self {
            RelationKind::Before => RelationKind::After,
            RelationKind::After => RelationKind::Before,
            RelationKind::Causes => RelationKind::CausedBy,
            RelationKind::CausedBy => RelationKind::Causes,
            _ => return None,
        })
    }
}

impl fmt::Display for RelationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A directed, typed edge between two events.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Relation {
    pub src: EventId,
    pub dst: EventId,
    pub kind: RelationKind,
    /// Mediating verb, normally present when `kind` is [`RelationKind::Other`].
    pub verb: Option<String>,
}

impl Relation {
    pub fn new(src: impl Into<EventId>, dst: impl Into<EventId>, kind: RelationKind) -> Self {
        Relation {
            src: src.into(),
            dst: dst.into(),
            kind,
            verb: None,
        }
    }

    pub fn other(src: impl Into<EventId>, dst: impl Into<EventId>, verb: impl Into<String>) -> Self {
        Relation {
            src: src.into(),
            dst: dst.into(),
            kind: RelationKind::Other,
            verb: Some(verb.into()),
        }
    }
}

/// A single event: something that happens, to somebody, somewhere, at
/// some point of the story.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Event {
    pub id: EventId,
    /// Lemma of the action verb (or a short label for abstractions).
    pub action: String,
    /// Participants in the order they were mentioned.
    pub entities: Vec<String>,
    pub location: Option<String>,
    pub timeframe: Timeframe,
    /// Free-form key/value annotations.
    pub properties: BTreeMap<String, String>,
    /// Coreferences to other events, sorted by `(path, kind, target)`.
    pub refs: Vec<EventRef>,
}

impl Event {
    pub fn new(id: impl Into<EventId>, action: impl Into<String>) -> Self {
        Event {
            id: id.into(),
            action: action.into(),
            entities: Vec::new(),
            location: None,
            timeframe: Timeframe::default(),
            properties: BTreeMap::new(),
            refs: Vec::new(),
        }
    }

    pub fn with_entities<I, S>(mut self, entities: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.entities = entities.into_iter().map(Into::into).collect();
        self
    }

    pub fn with_location(mut self, location: impl Into<String>) -> Self {
        self.location = Some(location.into());
        self
    }

    pub fn with_time_label(mut self, label: impl Into<String>) -> Self {
        self.timeframe.label = Some(label.into());
        self
    }

    pub fn with_order(mut self, order: i64) -> Self {
        self.timeframe.order = Some(order);
        self
    }

    pub fn with_property(mut self, key: impl Into<String>, value: impl Into<String>) -> Self {
        self.properties.insert(key.into(), value.into());
        self
    }

    pub fn with_ref(mut self, path: impl Into<String>, kind: RefKind, target: impl Into<EventId>) -> Self {
        self.refs.push(EventRef {
            path: path.into(),
            kind,
            target: target.into(),
        });
        self
    }
}

/// Which side of a collapsed selection a remembered boundary edge was on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Direction {
    /// External event → interior event.
    In,
    /// Interior event → external event.
    Out,
}

/// An edge that crossed the boundary of a collapsed selection, recorded
/// so that [`GestGraph::expand`] can reattach it to the right interior
/// event.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct BoundaryEdge {
    pub direction: Direction,
    /// The endpoint that stayed in the parent graph.
    pub external: EventId,
    /// The endpoint that moved into the payload subgraph.
    pub interior: EventId,
    pub kind: RelationKind,
    pub verb: Option<String>,
}

/// A reference on an external event that pointed at an interior event
/// before the collapse.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct BoundaryRef {
    /// The referring event in the parent graph.
    pub external: EventId,
    pub path: String,
    pub kind: RefKind,
    /// The original target inside the collapsed selection.
    pub interior: EventId,
}

/// Everything needed to undo a collapse: the collapsed subgraph plus
/// the edges and references that crossed its boundary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AbstractionPayload {
    pub subgraph: GestGraph,
    pub boundary_edges: Vec<BoundaryEdge>,
    pub boundary_refs: Vec<BoundaryRef>,
}

/// A structural problem found by [`GestGraph::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// An event whose action string is empty.
    EmptyAction { event: EventId },
    /// An entity string that is empty after trimming.
    EmptyEntity { event: EventId, index: usize },
    /// A relation from an event to itself.
    SelfLoop { relation: Relation },
    /// An `other` relation without a mediating verb.
    MissingVerb { relation: Relation },
    /// The same (src, dst, kind, verb) relation listed more than once.
    DuplicateRelation { relation: Relation },
    /// A relation endpoint that is not an event of the graph.
    MissingEndpoint { relation: Relation, missing: EventId },
    /// A reference whose target event does not exist.
    MissingRefTarget {
        event: EventId,
        path: String,
        target: EventId,
    },
    /// The temporal relations (`next`, `before`, `after`) order these
    /// events in a cycle.
    TemporalCycle { events: Vec<EventId> },
    /// An abstraction payload attached to an id with no event.
    PayloadWithoutEvent { event: EventId },
    /// A boundary record naming an external event missing from the
    /// parent graph.
    MissingBoundaryExternal { payload: EventId, external: EventId },
    /// A boundary record naming an interior event missing from the
    /// payload subgraph.
    MissingBoundaryInterior { payload: EventId, interior: EventId },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyAction { event } => write!(f, "event {event} has an empty action"),
            Violation::EmptyEntity { event, index } => {
                write!(f, "event {event} has an empty entity at index {index}")
            }
            Violation::SelfLoop { relation } => write!(
                f,
                "relation {} -> {} : {} is a self-loop",
                relation.src, relation.dst, relation.kind
            ),
            Violation::MissingVerb { relation } => write!(
                f,
                "other-relation {} -> {} has no verb",
                relation.src, relation.dst
            ),
            Violation::DuplicateRelation { relation } => write!(
                f,
                "relation {} -> {} : {} is listed more than once",
                relation.src, relation.dst, relation.kind
            ),
            Violation::MissingEndpoint { relation, missing } => write!(
                f,
                "relation {} -> {} : {} references missing event {missing}",
                relation.src, relation.dst, relation.kind
            ),
            Violation::MissingRefTarget { event, path, target } => write!(
                f,
                "ref {event}.{path} points at missing event {target}"
            ),
            Violation::TemporalCycle { events } => {
                write!(f, "temporal relations form a cycle through ")?;
                for (i, id) in events.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{id}")?;
                }
                Ok(())
            }
            Violation::PayloadWithoutEvent { event } => {
                write!(f, "abstraction payload attached to missing event {event}")
            }
            Violation::MissingBoundaryExternal { payload, external } => write!(
                f,
                "payload of {payload} records boundary with missing external event {external}"
            ),
            Violation::MissingBoundaryInterior { payload, interior } => write!(
                f,
                "payload of {payload} records boundary with missing interior event {interior}"
            ),
        }
    }
}

/// Result of validating a graph; empty means the graph is well formed.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// A story graph: events keyed by id, relations between them, and the
/// payloads of any collapsed abstractions.
///
/// The graph keeps itself in a normalized shape — relations sorted by
/// `(src, dst, kind, verb)` and each event's refs sorted — so that
/// structural equality (`==`) and the canonical serialization do not
/// depend on insertion order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GestGraph {
    events: BTreeMap<EventId, Event>,
    relations: Vec<Relation>,
    payloads: BTreeMap<EventId, AbstractionPayload>,
}

impl GestGraph {
    pub fn new() -> Self {
        GestGraph::default()
    }

    /// Inserts an event, returning the previous event with the same id
    /// if there was one.
    pub fn insert_event(&mut self, mut event: Event) -> Option<Event> {
        event.refs.sort();
        self.events.insert(event.id.clone(), event)
    }

    /// Removes an event. Relations and payloads are left untouched;
    /// callers tearing a graph apart are expected to fix them up or
    /// re-validate.
    pub fn remove_event(&mut self, id: &str) -> Option<Event> {
        self.events.remove(id)
    }

    /// Inserts a relation, keeping the relation list sorted. Duplicates
    /// are kept.
    pub fn insert_relation(&mut self, relation: Relation) {
        let at = self
            .relations
            .binary_search(&relation)
            .unwrap_or_else(|i| i);
        self.relations.insert(at, relation);
    }

    /// Removes all relations the predicate rejects.
    pub fn retain_relations(&mut self, keep: impl FnMut(&Relation) -> bool) {
        self.relations.retain(keep);
    }

    pub fn set_payload(&mut self, id: impl Into<EventId>, payload: AbstractionPayload) -> Option<AbstractionPayload> {
        self.payloads.insert(id.into(), payload)
    }

    pub fn take_payload(&mut self, id: &str) -> Option<AbstractionPayload> {
        self.payloads.remove(id)
    }

    pub fn event(&self, id: &str) -> Option<&Event> {
        self.events.get(id)
    }

    pub fn event_mut(&mut self, id: &str) -> Option<&mut Event> {
        self.events.get_mut(id)
    }

    pub fn contains_event(&self, id: &str) -> bool {
        self.events.contains_key(id)
    }

    /// Events in id order.
    pub fn events(&self) -> impl Iterator<Item = &Event> {
        self.events.values()
    }

    pub fn event_ids(&self) -> impl Iterator<Item = &EventId> {
        self.events.keys()
    }

    pub fn relations(&self) -> &[Relation] {
        &self.relations
    }

    pub fn payload(&self, id: &str) -> Option<&AbstractionPayload> {
        self.payloads.get(id)
    }

    /// Payloads in id order of their abstraction event.
    pub fn payloads(&self) -> impl Iterator<Item = (&EventId, &AbstractionPayload)> {
        self.payloads.iter()
    }

    pub fn event_count(&self) -> usize {
        self.events.len()
    }

    pub fn relation_count(&self) -> usize {
        self.relations.len()
    }

    pub fn payload_count(&self) -> usize {
        self.payloads.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Checks the structural invariants and reports every violation
    /// found, in a deterministic order.
    ///
    /// Checked: actions and entity strings are non-empty, relations are
    /// not self-loops, carry a verb when their kind is `other`, are not
    /// duplicated, and their endpoints and ref targets exist; the
    /// temporal subgraph (`next`, `before`, `after`) is acyclic; and
    /// abstraction payloads hang off real events with boundary records
    /// whose external side exists in this graph and whose interior side
    /// exists in the payload subgraph. Payload subgraphs are not
    /// validated recursively — their refs may legitimately point across
    /// the collapse boundary until expanded.
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();

        for event in self.events.values() {
            if event.action.is_empty() {
                violations.push(Violation::EmptyAction {
                    event: event.id.clone(),
                });
            }
            for (index, entity) in event.entities.iter().enumerate() {
                if entity.trim().is_empty() {
                    violations.push(Violation::EmptyEntity {
                        event: event.id.clone(),
                        index,
                    });
                }
            }
        }

        for (i, relation) in self.relations.iter().enumerate() {
            if relation.src == relation.dst {
                violations.push(Violation::SelfLoop {
                    relation: relation.clone(),
                });
            }
            if relation.kind == RelationKind::Other
                && relation.verb.as_ref().is_none_or(|v| v.is_empty())
            {
                violations.push(Violation::MissingVerb {
                    relation: relation.clone(),
                });
            }
            // The list is sorted, so duplicates sit next to each other.
            if i > 0 && self.relations[i - 1] == *relation {
                violations.push(Violation::DuplicateRelation {
                    relation: relation.clone(),
                });
            }
            for end in [&relation.src, &relation.dst] {
                if !self.events.contains_key(end.as_str()) {
                    violations.push(Violation::MissingEndpoint {
                        relation: relation.clone(),
                        missing: end.clone(),
                    });
                }
            }
        }

        for event in self.events.values() {
            for r in &event.refs {
                if !self.events.contains_key(r.target.as_str()) {
                    violations.push(Violation::MissingRefTarget {
                        event: event.id.clone(),
                        path: r.path.clone(),
                        target: r.target.clone(),
                    });
                }
            }
        }

        if let Some(cycle) = self.temporal_cycle() {
            violations.push(Violation::TemporalCycle { events: cycle });
        }

        for (id, payload) in &self.payloads {
            if !self.events.contains_key(id.as_str()) {
                violations.push(Violation::PayloadWithoutEvent { event: id.clone() });
            }
            for edge in &payload.boundary_edges {
                if !self.events.contains_key(edge.external.as_str()) {
                    violations.push(Violation::MissingBoundaryExternal {
                        payload: id.clone(),
                        external: edge.external.clone(),
                    });
                }
                if !payload.subgraph.contains_event(edge.interior.as_str()) {
                    violations.push(Violation::MissingBoundaryInterior {
                        payload: id.clone(),
                        interior: edge.interior.clone(),
                    });
                }
            }
            for r in &payload.boundary_refs {
                if !self.events.contains_key(r.external.as_str()) {
                    violations.push(Violation::MissingBoundaryExternal {
                        payload: id.clone(),
                        external: r.external.clone(),
                    });
                }
                if !payload.subgraph.contains_event(r.interior.as_str()) {
                    violations.push(Violation::MissingBoundaryInterior {
                        payload: id.clone(),
                        interior: r.interior.clone(),
                    });
                }
            }
        }

        ValidationReport { violations }
    }

    /// Finds events caught in a temporal cycle, if any.
    ///
    /// `next` and `before` edges order src ahead of dst; `after` edges
    /// state the opposite, so they contribute a reversed arc. Kahn
    /// peeling leaves exactly the events involved in cycles; they are
    /// returned sorted.
    fn temporal_cycle(&self) -> Option<Vec<EventId>> {
        let mut succ: BTreeMap<&EventId, Vec<&EventId>> = BTreeMap::new();
        let mut indegree: BTreeMap<&EventId, usize> = BTreeMap::new();

        for relation in &self.relations {
            if !relation.kind.is_temporal() {
                continue;
            }
            // Skip self-loops and dangling endpoints; both are reported
            // separately.
            if relation.src == relation.dst
                || !self.events.contains_key(relation.src.as_str())
                || !self.events.contains_key(relation.dst.as_str())
            {
                continue;
            }
            let (earlier, later) = match relation.kind {
                RelationKind::After => (&relation.dst, &relation.src),
                _ => (&relation.src, &relation.dst),
            };
            succ.entry(earlier).or_default().push(later);
            indegree.entry(earlier).or_default();
            *indegree.entry(later).or_default() += 1;
        }

        let mut queue: Vec<&EventId> = indegree
            .iter()
            .filter(|(_, &d)| d == 0)
            .map(|(&id, _)| id)
            .collect();
        let mut remaining = indegree.len();
        while let Some(id) = queue.pop() {
            remaining -= 1;
            if let Some(nexts) = succ.get(id) {
                for &n in nexts {
                    let d = indegree.get_mut(n).expect("successor was counted");
                    *d -= 1;
                    if *d == 0 {
                        queue.push(n);
                    }
                }
            }
            indegree.remove(id);
        }

        if remaining == 0 {
            return None;
        }
        let cyclic: BTreeSet<EventId> = indegree
            .iter()
            .filter(|(_, &d)| d > 0)
            .map(|(&id, _)| id.clone())
            .collect();
        Some(cyclic.into_iter().collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_event_graph() -> GestGraph {
        let mut g = GestGraph::new();
        g.insert_event(Event::new("e1", "open").with_entities(["john", "door"]));
        g.insert_event(Event::new("e2", "enter").with_entities(["john"]));
        g.insert_relation(Relation::new("e1", "e2", RelationKind::Next));
        g
    }

    #[test]
    fn valid_graph_has_empty_report() {
        assert!(two_event_graph().validate().is_valid());
    }

    #[test]
    fn empty_graph_is_valid() {
        assert!(GestGraph::new().validate().is_valid());
    }

    #[test]
    fn empty_action_is_reported() {
        let mut g = GestGraph::new();
        g.insert_event(Event::new("e1", ""));
        let report = g.validate();
        assert_eq!(
            report.violations,
            [Violation::EmptyAction {
                event: EventId::new("e1")
            }]
        );
    }

    #[test]
    fn dangling_relation_endpoint_is_reported() {
        let mut g = two_event_graph();
        g.insert_relation(Relation::new("e2", "ghost", RelationKind::Causes));
        let report = g.validate();
        assert_eq!(report.violations.len(), 1);
        assert!(matches!(
            &report.violations[0],
            Violation::MissingEndpoint { missing, .. } if missing.as_str() == "ghost"
        ));
    }

    #[test]
    fn dangling_ref_target_is_reported() {
        let mut g = two_event_graph();
        g.insert_event(
            Event::new("e3", "sleep").with_ref("entities[0]", RefKind::SameEntity, "nobody"),
        );
        let report = g.validate();
        assert_eq!(report.violations.len(), 1);
        assert!(matches!(
            &report.violations[0],
            Violation::MissingRefTarget { target, .. } if target.as_str() == "nobody"
        ));
    }

    #[test]
    fn next_cycle_is_reported() {
        let mut g = two_event_graph();
        g.insert_relation(Relation::new("e2", "e1", RelationKind::Next));
        let report = g.validate();
        assert_eq!(
            report.violations,
            [Violation::TemporalCycle {
                events: ["e1", "e2"].map(EventId::new).to_vec()
            }]
        );
    }

    #[test]
    fn after_edges_flip_orientation_in_cycle_check() {
        // e1 next e2 plus e1 after e2 means e1 < e2 and e2 < e1.
        let mut g = two_event_graph();
        g.insert_relation(Relation::new("e1", "e2", RelationKind::After));
        assert!(!g.validate().is_valid());

        // Whereas e2 after e1 agrees with e1 next e2.
        let mut g = two_event_graph();
        g.insert_relation(Relation::new("e2", "e1", RelationKind::After));
        assert!(g.validate().is_valid());
    }

    #[test]
    fn self_loops_are_rejected_for_every_kind() {
        let mut g = two_event_graph();
        g.insert_relation(Relation::new("e1", "e1", RelationKind::Before));
        let report = g.validate();
        assert_eq!(report.violations.len(), 1);
        assert!(matches!(&report.violations[0], Violation::SelfLoop { .. }));

        let mut g = two_event_graph();
        g.insert_relation(Relation::new("e2", "e2", RelationKind::Enables));
        assert!(!g.validate().is_valid());
    }

    #[test]
    fn other_relation_requires_a_verb() {
        let mut g = two_event_graph();
        g.insert_relation(Relation::new("e1", "e2", RelationKind::Other));
        let report = g.validate();
        assert_eq!(report.violations.len(), 1);
        assert!(matches!(&report.violations[0], Violation::MissingVerb { .. }));

        let mut g = two_event_graph();
        g.insert_relation(Relation::other("e1", "e2", "avoid"));
        assert!(g.validate().is_valid());
    }

    #[test]
    fn duplicate_relations_are_reported() {
        let mut g = two_event_graph();
        g.insert_relation(Relation::new("e1", "e2", RelationKind::Next));
        let report = g.validate();
        assert_eq!(report.violations.len(), 1);
        assert!(matches!(
            &report.violations[0],
            Violation::DuplicateRelation { relation } if relation.kind == RelationKind::Next
        ));

        // Same endpoints with a different kind or verb is not a duplicate.
        let mut g = two_event_graph();
        g.insert_relation(Relation::other("e1", "e2", "avoid"));
        g.insert_relation(Relation::other("e1", "e2", "follow"));
        assert!(g.validate().is_valid());
    }

    #[test]
    fn empty_entities_are_reported() {
        let mut g = GestGraph::new();
        g.insert_event(Event::new("e1", "open").with_entities(["john", "  "]));
        let report = g.validate();
        assert_eq!(
            report.violations,
            [Violation::EmptyEntity {
                event: EventId::new("e1"),
                index: 1
            }]
        );
    }

    #[test]
    fn non_temporal_cycles_are_allowed() {
        let mut g = two_event_graph();
        g.insert_relation(Relation::new("e2", "e1", RelationKind::Causes));
        g.insert_relation(Relation::new("e1", "e2", RelationKind::Causes));
        assert!(g.validate().is_valid());
    }

    #[test]
    fn same_time_does_not_order_events() {
        let mut g = two_event_graph();
        g.insert_relation(Relation::new("e2", "e1", RelationKind::SameTime));
        assert!(g.validate().is_valid());
    }

    #[test]
    fn relations_are_kept_sorted() {
        let mut g = GestGraph::new();
        g.insert_event(Event::new("a", "x"));
        g.insert_event(Event::new("b", "y"));
        g.insert_relation(Relation::new("b", "a", RelationKind::Next));
        g.insert_relation(Relation::new("a", "b", RelationKind::Causes));
        g.insert_relation(Relation::new("a", "b", RelationKind::Next));
        let kinds: Vec<_> = g.relations().iter().map(|r| (r.src.as_str(), r.kind)).collect();
        assert_eq!(
            kinds,
            [
                ("a", RelationKind::Next),
                ("a", RelationKind::Causes),
                ("b", RelationKind::Next)
            ]
        );
    }

    #[test]
    fn equality_ignores_insertion_order() {
        let mut g1 = GestGraph::new();
        g1.insert_event(Event::new("e1", "open"));
        g1.insert_event(Event::new("e2", "enter"));
        g1.insert_relation(Relation::new("e1", "e2", RelationKind::Next));
        g1.insert_relation(Relation::new("e2", "e1", RelationKind::CausedBy));

        let mut g2 = GestGraph::new();
        g2.insert_relation(Relation::new("e2", "e1", RelationKind::CausedBy));
        g2.insert_relation(Relation::new("e1", "e2", RelationKind::Next));
        g2.insert_event(Event::new("e2", "enter"));
        g2.insert_event(Event::new("e1", "open"));

        assert_eq!(g1, g2);
    }

    #[test]
    fn event_refs_are_normalized_on_insert() {
        let mut g1 = GestGraph::new();
        g1.insert_event(
            Event::new("e1", "meet")
                .with_ref("entities[1]", RefKind::SameEntity, "e0")
                .with_ref("entities[0]", RefKind::SameEntity, "e0"),
        );
        let mut g2 = GestGraph::new();
        g2.insert_event(
            Event::new("e1", "meet")
                .with_ref("entities[0]", RefKind::SameEntity, "e0")
                .with_ref("entities[1]", RefKind::SameEntity, "e0"),
        );
        assert_eq!(g1, g2);
    }

    #[test]
    fn payload_checks_cover_both_sides_of_the_boundary() {
        let mut sub = GestGraph::new();
        sub.insert_event(Event::new("i1", "inner"));
        let payload = AbstractionPayload {
            subgraph: sub,
            boundary_edges: [BoundaryEdge {
                direction: Direction::In,
                external: EventId::new("ghost"),
                interior: EventId::new("i1"),
                kind: RelationKind::Next,
                verb: None,
            }]
            .to_vec(),
            boundary_refs: [BoundaryRef {
                external: EventId::new("e1"),
                path: "entities[0]".into(),
                kind: RefKind::SameEntity,
                interior: EventId::new("missing"),
            }]
            .to_vec(),
        };
        let mut g = two_event_graph();
        g.set_payload("e1", payload);
        let report = g.validate();
        assert_eq!(report.violations.len(), 2);
        assert!(matches!(
            &report.violations[0],
            Violation::MissingBoundaryExternal { external, .. } if external.as_str() == "ghost"
        ));
        assert!(matches!(
            &report.violations[1],
            Violation::MissingBoundaryInterior { interior, .. } if interior.as_str() == "missing"
        ));
    }

    #[test]
    fn payload_on_missing_event_is_reported() {
        let mut g = two_event_graph();
        g.set_payload(
            "ghost",
            AbstractionPayload {
                subgraph: GestGraph::new(),
                boundary_edges: Vec::new(),
                boundary_refs: Vec::new(),
            },
        );
        let report = g.validate();
        assert_eq!(
            report.violations,
            [Violation::PayloadWithoutEvent {
                event: EventId::new("ghost")
            }]
        );
    }
}
