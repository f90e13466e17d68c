//! CAIN-style XML and plain-text listings of a network, and an XML reader
//! for round trips and standalone simulation.

use std::fmt::Write;

use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;
use thiserror::Error;

use crate::crn::{Crn, CrnError, IndicatorBinding, RateConfig, RateTier, Reaction, ReactionId, SpeciesId, SpeciesKind};

pub const MODEL_ID: &str = "ccx";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EmitError {
    #[error("refusing to emit an invalid network: {0}")]
    Invalid(CrnError),
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("malformed model at byte {offset}: {message}")]
pub struct XmlError {
    pub offset: u64,
    pub message: String,
}

fn check(crn: &Crn) -> Result<(), EmitError> {
    crn.validate_structure()
        .map_err(|mut errs| EmitError::Invalid(errs.swap_remove(0)))
}

fn xml_escape(s: &str) -> String {
    quick_xml::escape::escape(s).into_owned()
}

/// Serializes `crn` with tier values from `rates`.
///
/// Species become `s{id}` and reactions `r{id}`, both in id order, each
/// reaction referring to its tier's named parameter.
pub fn emit_cain_xml(crn: &Crn, rates: &RateConfig) -> Result<String, EmitError> {
    check(crn)?;
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    out.push_str("<cain>\n  <listOfModels>\n");
    writeln!(out, "    <model id=\"{MODEL_ID}\">").unwrap();

    out.push_str("      <listOfParameters>\n");
    for tier in RateTier::ALL {
        writeln!(
            out,
            "        <parameter id=\"{}\" expression=\"{}\"/>",
            tier.as_str(),
            rates.get(tier)
        )
        .unwrap();
    }
    out.push_str("      </listOfParameters>\n");

    if crn.species.is_empty() {
        out.push_str("      <listOfSpecies/>\n");
    } else {
        out.push_str("      <listOfSpecies>\n");
        for s in &crn.species {
            writeln!(
                out,
                "        <species id=\"{}\" name=\"{}\" initialAmount=\"{}\"/>",
                s.id,
                xml_escape(&s.name),
                s.initial_count
            )
            .unwrap();
        }
        out.push_str("      </listOfSpecies>\n");
    }

    if crn.reactions.is_empty() {
        out.push_str("      <listOfReactions/>\n");
    } else {
        out.push_str("      <listOfReactions>\n");
        for (i, r) in crn.reactions.iter().enumerate() {
            writeln!(
                out,
                "        <reaction id=\"{}\" massAction=\"true\" propensity=\"{}\">",
                ReactionId(i),
                r.tier
            )
            .unwrap();
            side(&mut out, "listOfReactants", &r.reactants);
            side(&mut out, "listOfProducts", &r.products);
            out.push_str("        </reaction>\n");
        }
        out.push_str("      </listOfReactions>\n");
    }
    out.push_str("    </model>\n  </listOfModels>\n</cain>\n");
    Ok(out)
}

fn side(out: &mut String, tag: &str, refs: &[(SpeciesId, u32)]) {
    if refs.is_empty() {
        writeln!(out, "          <{tag}/>").unwrap();
        return;
    }
    writeln!(out, "          <{tag}>").unwrap();
    for (s, n) in refs {
        writeln!(out, "            <speciesReference species=\"{s}\" stoichiometry=\"{n}\"/>").unwrap();
    }
    writeln!(out, "          </{tag}>").unwrap();
}

fn side_text(crn: &Crn, refs: &[(SpeciesId, u32)]) -> String {
    if refs.is_empty() {
        return "0".to_string();
    }
    refs.iter()
        .map(|&(s, n)| {
            if n == 1 {
                crn.name(s).to_string()
            } else {
                format!("{n} {}", crn.name(s))
            }
        })
        .collect::<Vec<_>>()
        .join(" + ")
}

/// `label: r1 + 2 r2 ->{tier} p1 + p2`, with `0` for an empty side.
pub fn reaction_line(crn: &Crn, r: &Reaction) -> String {
    format!(
        "{}: {} ->{} {}",
        r.label,
        side_text(crn, &r.reactants),
        r.tier,
        side_text(crn, &r.products)
    )
}

/// Text listing: a summary line, one `# species: name=init` line per
/// species, then one line per reaction in id order.
pub fn emit_crn_text(crn: &Crn) -> Result<String, EmitError> {
    check(crn)?;
    let mut out = String::new();
    writeln!(out, "# crn: {} species, {} reactions", crn.species.len(), crn.reactions.len()).unwrap();
    for s in &crn.species {
        writeln!(out, "# species: {}={}", s.name, s.initial_count).unwrap();
    }
    for r in &crn.reactions {
        out.push_str(&reaction_line(crn, r));
        out.push('\n');
    }
    Ok(out)
}

/// Guesses a species' role from the naming scheme used by codegen.
pub fn infer_kind(name: &str, initial_count: u64, known: impl Fn(&str) -> bool) -> SpeciesKind {
    let digits = |s: &str| !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit());
    let suffixed = |prefix: &str| name.strip_prefix(prefix).is_some_and(digits);
    if let Some(base) = name.strip_suffix("_ab") {
        if known(base) {
            return SpeciesKind::AbsenceIndicator;
        }
    }
    if suffixed("start_") {
        return SpeciesKind::SignalStart;
    }
    if suffixed("done_") {
        return SpeciesKind::SignalDone;
    }
    if suffixed("fuel_") {
        return SpeciesKind::Fuel;
    }
    if suffixed("t1_") || suffixed("t2_") || suffixed("t3_") {
        return SpeciesKind::DetectionT;
    }
    if matches!(name, "_localx" | "_localy" | "_localz") || suffixed("_tmp") || suffixed("cnt_") {
        return SpeciesKind::Register;
    }
    for prefix in ["c", "_c"] {
        if let Some(v) = name.strip_prefix(prefix) {
            if digits(v) && v.parse::<u64>().ok() == Some(initial_count) {
                return SpeciesKind::Constant;
            }
        }
    }
    if let Some((head, idx)) = name.rsplit_once('_') {
        if digits(idx) && (head.ends_with('p') || head.ends_with("rx")) && head.len() > 1 {
            return SpeciesKind::TempPrime;
        }
    }
    SpeciesKind::UserVariable
}

struct RawReaction {
    offset: u64,
    tier: RateTier,
    reactants: Vec<(String, u32)>,
    products: Vec<(String, u32)>,
}

fn attr(e: &BytesStart<'_>, key: &str, offset: u64) -> Result<Option<String>, XmlError> {
    for a in e.attributes() {
        let a = a.map_err(|err| XmlError { offset, message: err.to_string() })?;
        if a.key.as_ref() == key {
            let v = a
                .normalized_value(quick_xml::XmlVersion::Implicit1_0)
                .map_err(|err| XmlError { offset, message: err.to_string() })?;
            return Ok(Some(v.into_owned()));
        }
    }
    Ok(None)
}

fn required(e: &BytesStart<'_>, key: &str, offset: u64) -> Result<String, XmlError> {
    attr(e, key, offset)?.ok_or_else(|| XmlError {
        offset,
        message: format!(
            "<{}> is missing attribute '{key}'",
            AsRef::<str>::as_ref(&e.name())
        ),
    })
}

fn number<T: std::str::FromStr>(s: &str, what: &str, offset: u64) -> Result<T, XmlError> {
    s.parse().map_err(|_| XmlError {
        offset,
        message: format!("invalid {what} '{s}'"),
    })
}

/// Reads a document produced by [`emit_cain_xml`] (or a hand-written one
/// in the same shape). Returns the network and the parameter values.
///
/// Reaction labels are not part of the format; they come back as
/// `r{N}`, or as `{indicator}.generate/consume/cap` for recognized
/// absence-indicator maintenance. Species kinds are inferred from names,
/// and user variables become the observables.
pub fn parse_cain_xml(text: &str) -> Result<(Crn, RateConfig), XmlError> {
    let mut reader = Reader::from_str(text);
    let mut params: Vec<(String, f64)> = Vec::new();
    let mut species: Vec<(String, String, u64)> = Vec::new();
    let mut reactions: Vec<RawReaction> = Vec::new();
    let mut current: Option<RawReaction> = None;
    let mut in_products = false;
    let mut saw_model = false;
    let mut depth = 0usize;

    loop {
        let offset = reader.buffer_position();
        let ev = reader.read_event().map_err(|e| XmlError {
            offset: reader.error_position(),
            message: e.to_string(),
        })?;
        let (e, is_empty) = match ev {
            Event::Start(e) => {
                depth += 1;
                (e, false)
            }
            Event::Empty(e) => (e, true),
            Event::End(e) => {
                depth = depth.saturating_sub(1);
                match e.name().as_ref() {
                    "reaction" => reactions.extend(current.take()),
                    "listOfProducts" => in_products = false,
                    _ => {}
                }
                continue;
            }
            Event::Eof if depth > 0 => {
                return Err(XmlError {
                    offset: text.len() as u64,
                    message: "unexpected end of document".into(),
                })
            }
            Event::Eof => break,
            _ => continue,
        };
        match e.name().as_ref() {
            "model" => saw_model = true,
            "parameter" => {
                let id = required(&e, "id", offset)?;
                let expr = required(&e, "expression", offset)?;
                params.push((id, number(&expr, "parameter expression", offset)?));
            }
            "species" => {
                let id = required(&e, "id", offset)?;
                let name = attr(&e, "name", offset)?.unwrap_or_else(|| id.clone());
                let amount = required(&e, "initialAmount", offset)?;
                species.push((id, name, number(&amount, "initialAmount", offset)?));
            }
            "reaction" => {
                let p = required(&e, "propensity", offset)?;
                let tier = RateTier::from_name(&p).ok_or_else(|| XmlError {
                    offset,
                    message: format!("unknown propensity reference '{p}'"),
                })?;
                let raw = RawReaction {
                    offset,
                    tier,
                    reactants: Vec::new(),
                    products: Vec::new(),
                };
                if is_empty {
                    reactions.push(raw);
                } else {
                    current = Some(raw);
                }
            }
            "listOfProducts" => in_products = !is_empty,
            "listOfReactants" => in_products = false,
            "speciesReference" => {
                let s = required(&e, "species", offset)?;
                let n = match attr(&e, "stoichiometry", offset)? {
                    Some(v) => number(&v, "stoichiometry", offset)?,
                    None => 1,
                };
                let r = current.as_mut().ok_or_else(|| XmlError {
                    offset,
                    message: "speciesReference outside a reaction".into(),
                })?;
                if in_products {
                    r.products.push((s, n));
                } else {
                    r.reactants.push((s, n));
                }
            }
            _ => {}
        }
    }
    if !saw_model {
        return Err(XmlError { offset: 0, message: "no <model> element".into() });
    }

    let mut rates = RateConfig::default();
    for (id, v) in &params {
        match RateTier::from_name(id) {
            Some(RateTier::Fast) => rates.fast = *v,
            Some(RateTier::Slow) => rates.slow = *v,
            Some(RateTier::VerySlow) => rates.veryslow = *v,
            None => {}
        }
    }

    let names: std::collections::HashSet<&str> = species.iter().map(|(_, n, _)| n.as_str()).collect();
    let mut crn = Crn::new();
    let mut by_doc_id = std::collections::HashMap::new();
    for (doc_id, name, init) in &species {
        let kind = infer_kind(name, *init, |b| names.contains(b));
        let id = crn.add_species(name, *init, kind).map_err(|e| XmlError {
            offset: 0,
            message: e.to_string(),
        })?;
        if kind == SpeciesKind::UserVariable {
            crn.add_observable(id);
        }
        by_doc_id.insert(doc_id.as_str(), id);
    }

    for (i, r) in reactions.iter().enumerate() {
        let resolve = |side: &[(String, u32)]| -> Result<Vec<(SpeciesId, u32)>, XmlError> {
            side.iter()
                .map(|(s, n)| {
                    by_doc_id
                        .get(s.as_str())
                        .map(|&id| (id, *n))
                        .ok_or_else(|| XmlError {
                            offset: r.offset,
                            message: format!("reaction references undefined species '{s}'"),
                        })
                })
                .collect()
        };
        let reactants = resolve(&r.reactants)?;
        let products = resolve(&r.products)?;
        crn.add_reaction(&reactants, &products, r.tier, false, format!("r{i}"))
            .map_err(|e| XmlError { offset: r.offset, message: e.to_string() })?;
    }
    recover_indicators(&mut crn);
    Ok((crn, rates))
}

type Side = Vec<(SpeciesId, u32)>;

/// Marks the generate/consume/cap reactions of every `X_ab` species and
/// rebuilds the indicator bindings.
fn recover_indicators(crn: &mut Crn) {
    let indicators: Vec<(SpeciesId, SpeciesId)> = crn
        .species
        .iter()
        .filter(|s| s.kind == SpeciesKind::AbsenceIndicator)
        .filter_map(|s| {
            let base = s.name.strip_suffix("_ab")?;
            Some((crn.species_id(base)?, s.id))
        })
        .collect();
    for (x, ab) in indicators {
        let name = crn.name(ab).to_string();
        let patterns: [(Side, Side, RateTier, &str); 3] = [
            (vec![], vec![(ab, 1)], RateTier::Slow, "generate"),
            (sorted(vec![(x, 1), (ab, 1)]), vec![(x, 1)], RateTier::Fast, "consume"),
            (vec![(ab, 2)], vec![(ab, 1)], RateTier::Fast, "cap"),
        ];
        let mut found = [ReactionId(0); 3];
        let mut all = true;
        for (slot, (re, pr, tier, role)) in patterns.iter().enumerate() {
            match crn
                .reactions
                .iter()
                .position(|r| !r.is_maintenance && r.reactants == *re && r.products == *pr && r.tier == *tier)
            {
                Some(i) => {
                    crn.reactions[i].is_maintenance = true;
                    crn.reactions[i].label = format!("{name}.{role}");
                    found[slot] = ReactionId(i);
                }
                None => all = false,
            }
        }
        if all {
            crn.indicators.push(IndicatorBinding {
                indicated: x,
                indicator: ab,
                maintenance: found,
            });
        }
    }
}

fn sorted(mut v: Vec<(SpeciesId, u32)>) -> Vec<(SpeciesId, u32)> {
    v.sort_by_key(|(s, _)| *s);
    v
}
