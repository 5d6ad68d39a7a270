//! The built-in taxonomy: thirteen embedding patterns, their network
//! representation mirrors, three derived representation patterns that have
//! no embedding peer, and the two hybrid records.
//!
//! Mirror IDs reuse the embedding numbering with the `n` domain suffix
//! (`RN4n` mirrors `EN4`). Derived and hybrid representation records get
//! the next free numbers (`RT3n`, `RN6n`..`RN8.1n`); legacy pattern names
//! live on as aliases of the network-domain records they became.

use crate::covers::{ActionKind, ModifiableObjectKind};

use super::{Catalog, PatternId, PatternLinks, PatternName, PatternRecord};
use ActionKind as A;
use ModifiableObjectKind as O;

struct Builder {
    record: PatternRecord,
}

fn rec(id: &str, object: O, action: A, text: &str, description: &str) -> Builder {
    let id = PatternId::parse(id).expect("seed id parses");
    let parent = id.parent();
    Builder {
        record: PatternRecord {
            id,
            name: PatternName::new(object, action, text),
            aliases: vec![],
            description: description.to_string(),
            evidence: vec![],
            examples: vec![],
            links: PatternLinks {
                parent,
                ..PatternLinks::default()
            },
            extra: serde_json::Map::new(),
        },
    }
}

impl Builder {
    fn alias(mut self, a: &str) -> Self {
        self.record.aliases.push(a.to_string());
        self
    }

    fn evidence(mut self, e: &str) -> Self {
        self.record.evidence.push(e.to_string());
        self
    }

    fn example(mut self, e: &str) -> Self {
        self.record.examples.push(e.to_string());
        self
    }

    fn related(mut self, ids: &[&str]) -> Self {
        self.record.links.related =
            ids.iter().map(|s| PatternId::parse(s).unwrap()).collect();
        self
    }

    fn hybrid_of(mut self, ids: &[&str]) -> Self {
        self.record.links.hybrid_of =
            ids.iter().map(|s| PatternId::parse(s).unwrap()).collect();
        self
    }

    fn derived_from(mut self, id: &str) -> Self {
        self.record.links.derived_from = Some(PatternId::parse(id).unwrap());
        self
    }

    fn build(self) -> PatternRecord {
        self.record
    }
}

/// Build the built-in catalog. The result validates with zero violations.
pub fn seed_catalog() -> Catalog {
    let mut records = Vec::new();

    // Embedding patterns: temporal branch.
    records.push(
        rec(
            "ET1",
            O::Interval,
            A::Modulation,
            "Event/Element Interval Modulation",
            "Hides bits in the time gaps between succeeding elements or events of a carrier.",
        )
        .example("stretch or shrink inter-packet gaps")
        .example("delay successive machine actuations")
        .evidence("Zander, Armitage, Branch: covert channel survey (2007)")
        .build(),
    );
    records.push(
        rec(
            "ET1.1",
            O::Interval,
            A::Modulation,
            "Rate/Throughput",
            "Hides bits in the aggregate rate of elements per time window rather than in single gaps.",
        )
        .example("alternate packet rate between two levels per second")
        .build(),
    );
    records.push(
        rec(
            "ET2",
            O::Event,
            A::Occurrence,
            "Event Occurrence",
            "Hides bits in the moments at which events are triggered; a single event can carry a symbol.",
        )
        .related(&["EN2", "EN3"])
        .example("send a specific packet at an agreed minute")
        .example("disconnect at a chosen time slot")
        .build(),
    );

    // Embedding patterns: non-temporal branch.
    records.push(
        rec(
            "EN1",
            O::Element,
            A::Modulation,
            "Artificial Element-Loss Modulation",
            "Hides bits by deliberately dropping selected elements of a sequence.",
        )
        .example("drop segments with chosen sequence numbers")
        .example("remove commas from sentences")
        .evidence("Bender, Gruhl, Morimoto, Lu: data hiding techniques (1996)")
        .build(),
    );
    records.push(
        rec(
            "EN2",
            O::Element,
            A::Positioning,
            "Elements/Features Positioning",
            "Hides bits in the position of a predefined element or feature within a sequence.",
        )
        .example("place an option at a chosen index in the option list")
        .example("place a marker character inside a paragraph")
        .build(),
    );
    records.push(
        rec(
            "EN3",
            O::Element,
            A::Enumeration,
            "Elements/Features Enumeration",
            "Hides bits in how many times an element or feature appears.",
        )
        .example("fragment a packet into n or m pieces")
        .example("duplicate a white-space character, or not")
        .evidence("Bender, Gruhl, Morimoto, Lu: data hiding techniques (1996)")
        .build(),
    );
    records.push(
        rec(
            "EN4",
            O::StateValue,
            A::Modulation,
            "State/Value Modulation",
            "Hides bits by choosing the states or values of features, such as header fields or pixels.",
        )
        .related(&["EN5.2"])
        .example("set the low bit of a TTL field")
        .example("steer coordinates of a game entity")
        .evidence("Lucena, Lewis, Chapin: covert channels in IPv6 (2005)")
        .evidence("Zander, Armitage, Branch: covert channels in game traffic (2008)")
        .build(),
    );
    records.push(
        rec(
            "EN4.1",
            O::StateValue,
            A::Modulation,
            "Reserved/Unused State/Value Modulation",
            "Writes the message into states or values the carrier declares reserved or unused.",
        )
        .example("overwrite a reserved header field")
        .example("fill unused device registers")
        .evidence("Handel, Sandford: hiding data in the OSI network model (1996)")
        .build(),
    );
    records.push(
        rec(
            "EN4.2",
            O::StateValue,
            A::Modulation,
            "Random Modulation",
            "Replaces a value that is expected to look random with keystream-whitened message bits.",
        )
        .example("swap a nonce field for encrypted covert content")
        .build(),
    );
    records.push(
        rec(
            "EN4.3",
            O::StateValue,
            A::Corruption,
            "Blind State/Value Modulation",
            "Blindly overwrites data, e.g. deciding per element whether a checksum stays valid.",
        )
        .example("corrupt a checksum, or leave it intact")
        .example("overwrite payload bytes wholesale")
        .build(),
    );
    records.push(
        rec(
            "EN5",
            O::Feature,
            A::Modulation,
            "Feature Structure Modulation",
            "Hides bits in structural properties of a feature that are not plain values, positions, or counts.",
        )
        .example("grow or shrink succeeding packets")
        .example("restyle characters of a text")
        .build(),
    );
    records.push(
        rec(
            "EN5.1",
            O::Feature,
            A::Modulation,
            "Size Modulation",
            "Hides bits in element sizes, padded into agreed congruence classes.",
        )
        .example("pad payloads to chosen size classes")
        .build(),
    );
    records.push(
        rec(
            "EN5.2",
            O::Feature,
            A::Modulation,
            "Character Feature Modulation",
            "Hides bits in per-character features such as letter case or color.",
        )
        .related(&["EN4"])
        .example("toggle upper/lower case of protocol keywords")
        .example("tint characters of a document")
        .evidence("Dyatlov, Castro: text-based covert channels in HTTP (2003)")
        .build(),
    );

    // Network representation mirrors of the embedding tree.
    let mirrors: &[(&str, &str)] = &[
        ("ET1", "RT1n"),
        ("ET1.1", "RT1.1n"),
        ("ET2", "RT2n"),
        ("EN1", "RN1n"),
        ("EN2", "RN2n"),
        ("EN3", "RN3n"),
        ("EN4", "RN4n"),
        ("EN4.1", "RN4.1n"),
        ("EN4.2", "RN4.2n"),
        ("EN4.3", "RN4.3n"),
        ("EN5", "RN5n"),
        ("EN5.1", "RN5.1n"),
        ("EN5.2", "RN5.2n"),
    ];
    let legacy_aliases: &[(&str, &str)] = &[
        ("RT1n", "Inter-packet Times"),
        ("RT2n", "Message Timing"),
        ("RN1n", "Artificial Loss"),
        ("RN4n", "Value Modulation"),
    ];
    let embedding_by_id: Vec<PatternRecord> = records.clone();
    for (peer, mirror_id) in mirrors {
        let peer_record = embedding_by_id
            .iter()
            .find(|r| r.id.canonical() == *peer)
            .expect("mirror peer exists");
        let mut b = rec(
            mirror_id,
            peer_record.name.object,
            peer_record.name.action,
            &peer_record.name.text,
            &format!(
                "Network-domain representation of {}: the receiver reads the hidden data from this shape of the traffic.",
                peer_record.name.text
            ),
        )
        .related(&[peer]);
        for (id, alias) in legacy_aliases {
            if id == mirror_id {
                b = b.alias(alias);
            }
        }
        records.push(b.build());
    }

    // Derived representation patterns: observable side effects with no
    // embedding counterpart.
    records.push(
        rec(
            "RT3n",
            O::Element,
            A::Corruption,
            "Frame Corruptions",
            "The receiver reads symbols from when frames collide; frame contents are irrelevant and may be lost.",
        )
        .alias("Frame Collisions")
        .derived_from("RT2n")
        .example("time two transmissions into the same slot")
        .build(),
    );
    records.push(
        rec(
            "RN6n",
            O::Element,
            A::Repeating,
            "Artificial Retransmissions Modulation",
            "The receiver reads the retransmissions that dropped or duplicated elements provoke.",
        )
        .alias("Artificial Retransmission")
        .derived_from("RN1n")
        .related(&["RN3n"])
        .example("drop a segment so its resend is observed")
        .build(),
    );
    records.push(
        rec(
            "RN7n",
            O::Event,
            A::Modulation,
            "Artificial (Forced) Reconnections Modulation",
            "The receiver polls which clients got disconnected and reconnected after the sender transmitted trigger values.",
        )
        .alias("Artificial Reconnections")
        .derived_from("RN4n")
        .example("force a client off a broker and watch it rejoin")
        .evidence("Mileva, Velinov, Hartmann, Wendzel, Mazurczyk: MQTT 5.0 covert channels (2021)")
        .build(),
    );

    // Hybrid records; first-class entries flagged by hybrid_of.
    records.push(
        rec(
            "RN8n",
            O::Element,
            A::Modulation,
            "Sequence Modulation",
            "Hybrid of positioning and enumeration: both the order of elements and their count carry data.",
        )
        .hybrid_of(&["RN2n", "RN3n"])
        .build(),
    );
    records.push(
        rec(
            "RN8.1n",
            O::Element,
            A::Positioning,
            "Message Ordering",
            "Orders protocol data units instead of message elements; position and count are interpreted, not timing.",
        )
        .alias("PDU Ordering")
        .hybrid_of(&["RN2n", "RN3n"])
        .example("permute packets inside a reorder window")
        .build(),
    );

    Catalog::new(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::PatternKind;

    #[test]
    fn seed_is_valid() {
        assert_eq!(seed_catalog().validate(), vec![]);
    }

    #[test]
    fn thirteen_embedding_records() {
        assert_eq!(seed_catalog().embedding_records().count(), 13);
    }

    #[test]
    fn interval_modulation_mirror_carries_legacy_alias() {
        let catalog = seed_catalog();
        let r = catalog.resolve("Inter-packet Times").unwrap();
        assert_eq!(r.name.text, "Event/Element Interval Modulation");
        assert_eq!(r.id.canonical(), "RT1n");
    }

    #[test]
    fn message_timing_resolves_to_the_event_occurrence_mirror() {
        let catalog = seed_catalog();
        let r = catalog.resolve("Message Timing").unwrap();
        assert_eq!(r.id.canonical(), "RT2n");
        assert_eq!(r.id.kind, PatternKind::Representation);
    }

    #[test]
    fn retransmissions_have_no_embedding_peer() {
        let catalog = seed_catalog();
        let r = catalog.resolve("Artificial Retransmissions Modulation").unwrap();
        assert_eq!(r.id.kind, PatternKind::Representation);
        assert!(r.links.derived_from.is_some());
        assert!(catalog
            .embedding_records()
            .all(|e| e.name.text != r.name.text));
    }

    #[test]
    fn en4_resolves_by_id() {
        let catalog = seed_catalog();
        assert_eq!(
            catalog.resolve("EN4").unwrap().name.text,
            "State/Value Modulation"
        );
    }

    #[test]
    fn shared_compound_names_resolve_to_the_embedding_record() {
        let catalog = seed_catalog();
        let r = catalog.resolve("rate/throughput").unwrap();
        assert_eq!(r.id.canonical(), "ET1.1");
    }

    #[test]
    fn hybrids_are_flagged_and_arity_two() {
        let catalog = seed_catalog();
        for key in ["Sequence Modulation", "Message Ordering"] {
            let r = catalog.resolve(key).unwrap();
            assert!(r.is_hybrid());
            assert_eq!(r.links.hybrid_of.len(), 2);
        }
    }

    #[test]
    fn parent_chains_terminate_quickly() {
        let catalog = seed_catalog();
        for r in &catalog.records {
            let mut id = r.id.clone();
            let mut steps = 0;
            while let Some(parent) = id.parent() {
                assert!(catalog.get(&parent).is_some(), "parent of {id}");
                id = parent;
                steps += 1;
                assert!(steps <= 3, "parent chain of {} too deep", r.id);
            }
            assert!(id.is_root());
        }
    }
}
