//! Hierarchical abstraction: collapsing a set of events into a single
//! abstract event and expanding it back.
//!
//! A story graph can be told at several levels of detail. `collapse`
//! replaces a selection of events with one event whose
//! [`AbstractionPayload`] remembers the interior subgraph and every
//! edge or reference that crossed the selection boundary; `expand` is
//! its exact inverse. Both operate on immutable values and return new
//! graphs.
//!
//! Any non-empty selection may be collapsed and the round trip always
//! restores the original graph. Note that collapsing a temporally
//! *non-convex* selection (one that skips over an event ordered between
//! two members) routes that event both before and after the
//! abstraction, so the intermediate graph fails validation until it is
//! expanded again; collapsing a convex selection of a valid graph stays
//! valid.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::model::{
    AbstractionPayload, BoundaryEdge, BoundaryRef, Direction, Event, EventId, GestGraph, Relation,
};

/// Why a collapse or expand could not be performed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HierarchyError {
    /// The selection to collapse was empty.
    EmptySelection,
    /// A selected id has no event in the graph.
    UnknownEvent(EventId),
    /// The id chosen for the abstraction event already exists.
    IdTaken(EventId),
    /// The event to expand does not exist.
    NoSuchEvent(EventId),
    /// The event to expand carries no abstraction payload.
    NotAnAbstraction(EventId),
    /// Expanding would reintroduce an id that meanwhile exists again.
    IdCollision(EventId),
    /// A recorded boundary ref no longer matches any ref on its
    /// external event, so it cannot be reattached.
    UnattachableRef { external: EventId, path: String },
}

impl fmt::Display for HierarchyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HierarchyError::EmptySelection => f.write_str("cannot collapse an empty selection"),
            HierarchyError::UnknownEvent(id) => write!(f, "no event with id {id}"),
            HierarchyError::IdTaken(id) => write!(f, "id {id} is already used by an event"),
            HierarchyError::NoSuchEvent(id) => write!(f, "no event with id {id}"),
            HierarchyError::NotAnAbstraction(id) => {
                write!(f, "event {id} has no abstraction payload")
            }
            HierarchyError::IdCollision(id) => {
                write!(f, "expanding would duplicate event id {id}")
            }
            HierarchyError::UnattachableRef { external, path } => write!(
                f,
                "recorded boundary ref {external}.{path} matches no ref on that event"
            ),
        }
    }
}

impl core::error::Error for HierarchyError {}

impl GestGraph {
    /// Replaces the events in `selection` by a single abstract event
    /// `new_id` with action `label`.
    ///
    /// The interior — the selected events, their payloads, and every
    /// relation among them — moves into the new event's payload. Edges
    /// between an outside event and a selected one are rerouted to
    /// `new_id` (deduplicated by `(src, dst, kind, verb)`) and recorded
    /// as boundary edges; refs on outside events targeting a selected
    /// event are likewise retargeted and recorded. Everything not
    /// touching the selection is carried over unchanged.
    pub fn collapse(
        &self,
        selection: &[EventId],
        new_id: impl Into<EventId>,
        label: impl Into<String>,
    ) -> Result<GestGraph, HierarchyError> {
        let new_id = new_id.into();
        if selection.is_empty() {
            return Err(HierarchyError::EmptySelection);
        }
        let selected: BTreeSet<&EventId> = selection.iter().collect();
        for &id in &selected {
            if !self.contains_event(id.as_str()) {
                return Err(HierarchyError::UnknownEvent(id.clone()));
            }
        }
        if self.contains_event(new_id.as_str()) {
            return Err(HierarchyError::IdTaken(new_id));
        }

        let mut result = GestGraph::new();
        let mut subgraph = GestGraph::new();
        let mut boundary_edges = Vec::new();
        let mut boundary_refs = Vec::new();

        for event in self.events() {
            if selected.contains(&event.id) {
                subgraph.insert_event(event.clone());
                if let Some(p) = self.payload(event.id.as_str()) {
                    subgraph.set_payload(event.id.clone(), p.clone());
                }
            } else {
                // Retarget refs that point into the selection.
                let mut event = event.clone();
                for r in &mut event.refs {
                    if selected.contains(&r.target) {
                        boundary_refs.push(BoundaryRef {
                            external: event.id.clone(),
                            path: r.path.clone(),
                            kind: r.kind,
                            interior: core::mem::replace(&mut r.target, new_id.clone()),
                        });
                    }
                }
                result.insert_event(event.clone());
                if let Some(p) = self.payload(event.id.as_str()) {
                    result.set_payload(event.id.clone(), p.clone());
                }
            }
        }

        let mut rerouted: BTreeSet<Relation> = BTreeSet::new();
        for relation in self.relations() {
            let src_in = selected.contains(&relation.src);
            let dst_in = selected.contains(&relation.dst);
            match (src_in, dst_in) {
                (true, true) => subgraph.insert_relation(relation.clone()),
                (false, false) => result.insert_relation(relation.clone()),
                (false, true) => {
                    boundary_edges.push(BoundaryEdge {
                        direction: Direction::In,
                        external: relation.src.clone(),
                        interior: relation.dst.clone(),
                        kind: relation.kind,
                        verb: relation.verb.clone(),
                    });
                    rerouted.insert(Relation {
                        src: relation.src.clone(),
                        dst: new_id.clone(),
                        kind: relation.kind,
                        verb: relation.verb.clone(),
                    });
                }
                (true, false) => {
                    boundary_edges.push(BoundaryEdge {
                        direction: Direction::Out,
                        external: relation.dst.clone(),
                        interior: relation.src.clone(),
                        kind: relation.kind,
                        verb: relation.verb.clone(),
                    });
                    rerouted.insert(Relation {
                        src: new_id.clone(),
                        dst: relation.dst.clone(),
                        kind: relation.kind,
                        verb: relation.verb.clone(),
                    });
                }
            }
        }
        for relation in rerouted {
            result.insert_relation(relation);
        }

        result.insert_event(Event::new(new_id.clone(), label));
        result.set_payload(
            new_id,
            AbstractionPayload {
                subgraph,
                boundary_edges,
                boundary_refs,
            },
        );
        Ok(result)
    }

    /// Undoes a [`collapse`](GestGraph::collapse): removes the abstract
    /// event `id`, restores the payload's interior, and reattaches the
    /// recorded boundary edges and refs.
    ///
    /// Relations and refs involving `id` that were added after the
    /// collapse (and therefore have no boundary record) are dropped
    /// with the abstract event.
    pub fn expand(&self, id: &str) -> Result<GestGraph, HierarchyError> {
        if !self.contains_event(id) {
            return Err(HierarchyError::NoSuchEvent(EventId::new(id)));
        }
        let payload = self
            .payload(id)
            .ok_or_else(|| HierarchyError::NotAnAbstraction(EventId::new(id)))?;

        for interior in payload.subgraph.event_ids() {
            if self.contains_event(interior.as_str()) {
                return Err(HierarchyError::IdCollision(interior.clone()));
            }
        }

        let mut result = GestGraph::new();
        for event in self.events() {
            if event.id.as_str() == id {
                continue;
            }
            result.insert_event(event.clone());
            if let Some(p) = self.payload(event.id.as_str()) {
                result.set_payload(event.id.clone(), p.clone());
            }
        }
        for relation in self.relations() {
            if relation.src.as_str() == id || relation.dst.as_str() == id {
                continue;
            }
            result.insert_relation(relation.clone());
        }

        for event in payload.subgraph.events() {
            result.insert_event(event.clone());
            if let Some(p) = payload.subgraph.payload(event.id.as_str()) {
                result.set_payload(event.id.clone(), p.clone());
            }
        }
        for relation in payload.subgraph.relations() {
            result.insert_relation(relation.clone());
        }

        for edge in &payload.boundary_edges {
            let (src, dst) = match edge.direction {
                Direction::In => (edge.external.clone(), edge.interior.clone()),
                Direction::Out => (edge.interior.clone(), edge.external.clone()),
            };
            result.insert_relation(Relation {
                src,
                dst,
                kind: edge.kind,
                verb: edge.verb.clone(),
            });
        }

        for record in &payload.boundary_refs {
            let event = result
                .event_mut(record.external.as_str())
                .ok_or_else(|| HierarchyError::UnattachableRef {
                    external: record.external.clone(),
                    path: record.path.clone(),
                })?;
            let slot = event
                .refs
                .iter_mut()
                .find(|r| {
                    r.path == record.path && r.kind == record.kind && r.target.as_str() == id
                })
                .ok_or_else(|| HierarchyError::UnattachableRef {
                    external: record.external.clone(),
                    path: record.path.clone(),
                })?;
            slot.target = record.interior.clone();
            event.refs.sort();
        }

        // Any refs still aimed at the abstraction were added after the
        // collapse; they go away with it.
        let ids: Vec<EventId> = result.event_ids().cloned().collect();
        for eid in ids {
            let event = result.event_mut(eid.as_str()).expect("listed id exists");
            event.refs.retain(|r| r.target.as_str() != id);
        }

        Ok(result)
    }
}
