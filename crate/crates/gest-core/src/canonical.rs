//! The canonical line-based serialization of a [`GestGraph`].
//!
//! One record per line:
//!
//! ```text
//! EVENT <id> | action=<a> | entities=<e1,e2> | location=<l> | time=<label>#<order> | props=<k1=v1;k2=v2>
//! EDGE <src> -> <dst> : <kind>            (or `: other(<verb>)`)
//! REF <id>.<path> SAME_<KIND> <target>
//! PAYLOAD <id> {                          (collapsed interior + boundary records)
//!   ...graph lines...
//!   BOUNDARY IN <external> -> <interior> : <kind>
//!   BOUNDARY OUT <interior> -> <external> : <kind>
//!   BREF <external>.<path> SAME_<KIND> <interior>
//! }
//! ```
//!
//! Optional fields omit their segment entirely. Output is
//! deterministic: events sorted by id, edges in the graph's sorted
//! relation order, refs per event in normalized order, payload blocks
//! by owner id. Structural characters inside values are
//! percent-escaped (`%7C` for `|` and so on); ids and ref paths
//! additionally escape spaces and dots. `parse_canonical_string`
//! rejects malformed input with the 1-based line number and a reason.
//!
//! One corner is lossy by construction: a timeframe label that is the
//! empty string (not absent, `Some("")`) combined with an order parses
//! back as an absent label, because `time=#3` cannot distinguish the
//! two.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::{self, Write as _};

use crate::model::{
    AbstractionPayload, BoundaryEdge, BoundaryRef, Direction, Event, EventId, EventRef, GestGraph,
    RefKind, Relation, RelationKind,
};

/// A syntax error, located by 1-based line number.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl ParseError {
    fn new(line: usize, message: impl Into<String>) -> Self {
        ParseError {
            line,
            message: message.into(),
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

impl core::error::Error for ParseError {}

fn is_special(c: char) -> bool {
    matches!(
        c,
        '%' | '|' | ',' | ';' | '=' | '#' | '(' | ')' | '{' | '}' | '\n' | '\r' | '\t'
    )
}

fn escape_into(out: &mut String, s: &str, strict: bool) {
    for c in s.chars() {
        if is_special(c) || (strict && (c == ' ' || c == '.')) {
            let _ = write!(out, "%{:02X}", c as u32);
        } else {
            out.push(c);
        }
    }
}

/// Escapes a free-text value (action, entity, location, label, verb,
/// property key or value).
fn escape_value(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    escape_into(&mut out, s, false);
    out
}

/// Escapes an id or ref path, which must stay free of spaces and dots.
fn escape_atom(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    escape_into(&mut out, s, true);
    out
}

fn unescape(s: &str, line: usize) -> Result<String, ParseError> {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c != '%' {
            out.push(c);
            continue;
        }
        let hi = chars.next();
        let lo = chars.next();
        let (Some(hi), Some(lo)) = (hi, lo) else {
            return Err(ParseError::new(line, "truncated % escape"));
        };
        let (Some(hi), Some(lo)) = (hi.to_digit(16), lo.to_digit(16)) else {
            return Err(ParseError::new(line, "invalid % escape digits"));
        };
        let code = hi * 16 + lo;
        if code > 0x7F {
            return Err(ParseError::new(line, "non-ascii % escape"));
        }
        out.push(code as u8 as char);
    }
    Ok(out)
}

fn ref_kind_token(kind: RefKind) -> &'static str {
    match kind {
        RefKind::SameEntity => "SAME_ENTITY",
        RefKind::SameLocation => "SAME_LOCATION",
        RefKind::SameTime => "SAME_TIME",
        RefKind::SameEvent => "SAME_EVENT",
    }
}

fn parse_ref_kind_token(s: &str, line: usize) -> Result<RefKind, ParseError> {
    Ok(match s {
        "SAME_ENTITY" => RefKind::SameEntity,
        "SAME_LOCATION" => RefKind::SameLocation,
        "SAME_TIME" => RefKind::SameTime,
        "SAME_EVENT" => RefKind::SameEvent,
        _ => return Err(ParseError::new(line, "unknown ref kind")),
    })
}

fn kind_spec(kind: RelationKind, verb: Option<&str>) -> String {
    match verb {
        None => kind.as_str().to_string(),
        Some(v) => {
            let mut s = String::new();
            let _ = write!(s, "{}({})", kind.as_str(), escape_value(v));
            s
        }
    }
}

fn write_event_line(out: &mut String, event: &Event) {
    let _ = write!(
        out,
        "EVENT {} | action={}",
        escape_atom(event.id.as_str()),
        escape_value(&event.action)
    );
    if !event.entities.is_empty() {
        out.push_str(" | entities=");
        for (i, e) in event.entities.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            escape_into(out, e, false);
        }
    }
    if let Some(location) = &event.location {
        let _ = write!(out, " | location={}", escape_value(location));
    }
    if !event.timeframe.is_empty() {
        out.push_str(" | time=");
        if let Some(label) = &event.timeframe.label {
            escape_into(out, label, false);
        }
        if let Some(order) = event.timeframe.order {
            let _ = write!(out, "#{order}");
        }
    }
    if !event.properties.is_empty() {
        out.push_str(" | props=");
        for (i, (k, v)) in event.properties.iter().enumerate() {
            if i > 0 {
                out.push(';');
            }
            escape_into(out, k, false);
            out.push('=');
            escape_into(out, v, false);
        }
    }
    out.push('\n');
}

fn write_graph(out: &mut String, g: &GestGraph) {
    for event in g.events() {
        write_event_line(out, event);
    }
    for r in g.relations() {
        let _ = writeln!(
            out,
            "EDGE {} -> {} : {}",
            escape_atom(r.src.as_str()),
            escape_atom(r.dst.as_str()),
            kind_spec(r.kind, r.verb.as_deref())
        );
    }
    for event in g.events() {
        for r in &event.refs {
            let _ = writeln!(
                out,
                "REF {}.{} {} {}",
                escape_atom(event.id.as_str()),
                escape_atom(&r.path),
                ref_kind_token(r.kind),
                escape_atom(r.target.as_str())
            );
        }
    }
    for (id, payload) in g.payloads() {
        let _ = writeln!(out, "PAYLOAD {} {{", escape_atom(id.as_str()));
        write_graph(out, &payload.subgraph);
        for edge in &payload.boundary_edges {
            let (tag, src, dst) = match edge.direction {
                Direction::In => ("IN", &edge.external, &edge.interior),
                Direction::Out => ("OUT", &edge.interior, &edge.external),
            };
            let _ = writeln!(
                out,
                "BOUNDARY {tag} {} -> {} : {}",
                escape_atom(src.as_str()),
                escape_atom(dst.as_str()),
                kind_spec(edge.kind, edge.verb.as_deref())
            );
        }
        for r in &payload.boundary_refs {
            let _ = writeln!(
                out,
                "BREF {}.{} {} {}",
                escape_atom(r.external.as_str()),
                escape_atom(&r.path),
                ref_kind_token(r.kind),
                escape_atom(r.interior.as_str())
            );
        }
        out.push_str("}\n");
    }
}

impl GestGraph {
    /// Renders the graph in the canonical line format. The output is
    /// identical for structurally equal graphs.
    pub fn to_canonical_string(&self) -> String {
        let mut out = String::new();
        write_graph(&mut out, self);
        out
    }
}

/// `(src, dst, kind, verb)` as parsed from an edge-shaped line tail.
struct EdgeLine {
    src: EventId,
    dst: EventId,
    kind: RelationKind,
    verb: Option<String>,
}

fn parse_edge_tail(rest: &str, line: usize) -> Result<EdgeLine, ParseError> {
    let (src, rest) = rest
        .split_once(" -> ")
        .ok_or_else(|| ParseError::new(line, "expected ` -> ` between endpoints"))?;
    let (dst, tail) = rest
        .split_once(" : ")
        .ok_or_else(|| ParseError::new(line, "expected ` : ` before relation kind"))?;
    let (kind_token, verb) = match tail.split_once('(') {
        None => (tail, None),
        Some((kind_token, inner)) => {
            let inner = inner
                .strip_suffix(')')
                .ok_or_else(|| ParseError::new(line, "unterminated verb parenthesis"))?;
            (kind_token, Some(unescape(inner, line)?))
        }
    };
    let kind = RelationKind::parse(kind_token)
        .ok_or_else(|| ParseError::new(line, "unknown relation kind"))?;
    Ok(EdgeLine {
        src: EventId::new(unescape(src, line)?),
        dst: EventId::new(unescape(dst, line)?),
        kind,
        verb,
    })
}

/// `(owner, path, kind, target)` as parsed from a ref-shaped line tail.
fn parse_ref_tail(rest: &str, line: usize) -> Result<(EventId, String, RefKind, EventId), ParseError> {
    let mut tokens = rest.split_whitespace();
    let (Some(owner_path), Some(kind_token), Some(target), None) =
        (tokens.next(), tokens.next(), tokens.next(), tokens.next())
    else {
        return Err(ParseError::new(
            line,
            "expected `<id>.<path> SAME_<KIND> <target>`",
        ));
    };
    let (owner, path) = owner_path
        .split_once('.')
        .ok_or_else(|| ParseError::new(line, "expected `.` between id and path"))?;
    let kind = parse_ref_kind_token(kind_token, line)?;
    Ok((
        EventId::new(unescape(owner, line)?),
        unescape(path, line)?,
        kind,
        EventId::new(unescape(target, line)?),
    ))
}

fn parse_event_line(rest: &str, line: usize) -> Result<Event, ParseError> {
    let mut segments = rest.split(" | ");
    let id = segments
        .next()
        .filter(|s| !s.is_empty())
        .ok_or_else(|| ParseError::new(line, "missing event id"))?;
    let mut event = Event::new(unescape(id, line)?, "");
    let mut seen: Vec<&str> = Vec::new();
    for segment in segments {
        let (key, value) = segment
            .split_once('=')
            .ok_or_else(|| ParseError::new(line, "segment without `=`"))?;
        if seen.contains(&key) {
            return Err(ParseError::new(line, "duplicate segment"));
        }
        seen.push(key);
        match key {
            "action" => event.action = unescape(value, line)?,
            "entities" => {
                event.entities = value
                    .split(',')
                    .map(|e| unescape(e, line))
                    .collect::<Result<_, _>>()?;
            }
            "location" => event.location = Some(unescape(value, line)?),
            "time" => match value.split_once('#') {
                None => event.timeframe.label = Some(unescape(value, line)?),
                Some((label, order)) => {
                    if !label.is_empty() {
                        event.timeframe.label = Some(unescape(label, line)?);
                    }
                    event.timeframe.order = Some(order.parse::<i64>().map_err(|_| {
                        ParseError::new(line, "time order is not an integer")
                    })?);
                }
            },
            "props" => {
                for pair in value.split(';') {
                    let (k, v) = pair
                        .split_once('=')
                        .ok_or_else(|| ParseError::new(line, "property without `=`"))?;
                    let k = unescape(k, line)?;
                    let v = unescape(v, line)?;
                    if event.properties.insert(k, v).is_some() {
                        return Err(ParseError::new(line, "duplicate property key"));
                    }
                }
            }
            _ => return Err(ParseError::new(line, "unknown segment")),
        }
    }
    Ok(event)
}

struct PayloadCtx {
    owner: EventId,
    open_line: usize,
    edges: Vec<BoundaryEdge>,
    refs: Vec<BoundaryRef>,
}

struct Frame {
    graph: GestGraph,
    ctx: Option<PayloadCtx>,
}

/// Parses the canonical line format back into a graph.
///
/// Blank lines are ignored. Events must be defined before `REF` lines
/// that attach to them; `BOUNDARY`/`BREF` lines are only legal inside a
/// `PAYLOAD` block. Referential integrity beyond that is *not* checked
/// here — run [`GestGraph::validate`] on the result.
pub fn parse_canonical_string(s: &str) -> Result<GestGraph, ParseError> {
    let mut stack: Vec<Frame> = Vec::new();
    stack.push(Frame {
        graph: GestGraph::new(),
        ctx: None,
    });

    for (idx, raw) in s.lines().enumerate() {
        let line = idx + 1;
        if raw.is_empty() {
            continue;
        }
        let frame = stack.last_mut().expect("stack never empties");

        if let Some(rest) = raw.strip_prefix("EVENT ") {
            let event = parse_event_line(rest, line)?;
            if frame.graph.insert_event(event).is_some() {
                return Err(ParseError::new(line, "duplicate event id"));
            }
        } else if let Some(rest) = raw.strip_prefix("EDGE ") {
            let edge = parse_edge_tail(rest, line)?;
            frame.graph.insert_relation(Relation {
                src: edge.src,
                dst: edge.dst,
                kind: edge.kind,
                verb: edge.verb,
            });
        } else if let Some(rest) = raw.strip_prefix("REF ") {
            let (owner, path, kind, target) = parse_ref_tail(rest, line)?;
            let event = frame
                .graph
                .event_mut(owner.as_str())
                .ok_or_else(|| ParseError::new(line, "REF names an undefined event"))?;
            event.refs.push(EventRef { path, kind, target });
            event.refs.sort();
        } else if let Some(rest) = raw.strip_prefix("PAYLOAD ") {
            let id = rest
                .strip_suffix(" {")
                .ok_or_else(|| ParseError::new(line, "expected `PAYLOAD <id> {`"))?;
            stack.push(Frame {
                graph: GestGraph::new(),
                ctx: Some(PayloadCtx {
                    owner: EventId::new(unescape(id, line)?),
                    open_line: line,
                    edges: Vec::new(),
                    refs: Vec::new(),
                }),
            });
        } else if let Some(rest) = raw.strip_prefix("BOUNDARY ") {
            let ctx = frame
                .ctx
                .as_mut()
                .ok_or_else(|| ParseError::new(line, "BOUNDARY outside a payload block"))?;
            let (direction, rest) = if let Some(r) = rest.strip_prefix("IN ") {
                (Direction::In, r)
            } else if let Some(r) = rest.strip_prefix("OUT ") {
                (Direction::Out, r)
            } else {
                return Err(ParseError::new(line, "expected `BOUNDARY IN` or `BOUNDARY OUT`"));
            };
            let edge = parse_edge_tail(rest, line)?;
            let (external, interior) = match direction {
                Direction::In => (edge.src, edge.dst),
                Direction::Out => (edge.dst, edge.src),
            };
            ctx.edges.push(BoundaryEdge {
                direction,
                external,
                interior,
                kind: edge.kind,
                verb: edge.verb,
            });
        } else if let Some(rest) = raw.strip_prefix("BREF ") {
            let ctx = frame
                .ctx
                .as_mut()
                .ok_or_else(|| ParseError::new(line, "BREF outside a payload block"))?;
            let (external, path, kind, interior) = parse_ref_tail(rest, line)?;
            ctx.refs.push(BoundaryRef {
                external,
                path,
                kind,
                interior,
            });
        } else if raw == "}" {
            let frame = stack.pop().expect("stack never empties");
            let Some(ctx) = frame.ctx else {
                return Err(ParseError::new(line, "`}` without an open payload block"));
            };
            let payload = AbstractionPayload {
                subgraph: frame.graph,
                boundary_edges: ctx.edges,
                boundary_refs: ctx.refs,
            };
            let parent = stack.last_mut().expect("root frame remains");
            if parent.graph.set_payload(ctx.owner.clone(), payload).is_some() {
                return Err(ParseError::new(line, "duplicate payload for one event"));
            }
        } else {
            return Err(ParseError::new(line, "unrecognized line"));
        }
    }

    let frame = stack.pop().expect("stack never empties");
    if let Some(ctx) = &frame.ctx {
        return Err(ParseError::new(
            ctx.open_line,
            "payload block is never closed",
        ));
    }
    Ok(frame.graph)
}
