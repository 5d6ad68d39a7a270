//! stegpat: hiding patterns as executable artifacts.
//!
//! The crate turns a taxonomy of steganographic hiding patterns into
//! running code:
//!
//! - [`catalog`] — the pattern taxonomy as validated PLML-style records,
//!   with the ID grammar, the built-in pattern set, and catalog file I/O.
//! - [`covers`] — the carriers: packet flows, text documents, grayscale
//!   images, plus enumeration of their modifiable objects and trace I/O.
//! - [`embedders`] — every embedding pattern as a reversible codec:
//!   [`embedders::capacity`], [`embedders::embed`], [`embedders::extract`],
//!   and hybrid composition.
//! - [`netsim`] — a deterministic discrete-event channel with ARQ,
//!   forced reconnections, and frame collisions; realizes the derived
//!   representation patterns where embedding and representation differ.
//! - [`warden`] — small statistical plausibility checks on cover/stego
//!   pairs.
//! - [`trials`] — a seeded batch round-trip harness (data-parallel with
//!   the `parallel` feature, sequential otherwise).
//!
//! Messages are framed bit strings ([`message::SecretMessage`]); all
//! operations are pure functions over immutable values, so concurrent use
//! needs no synchronization.

pub mod catalog;
pub mod covers;
pub mod embedders;
pub mod keystream;
pub mod message;
pub mod netsim;
pub mod perm;
pub mod trials;
pub mod warden;

pub use catalog::{seed_catalog, Catalog, PatternId, PatternRecord};
pub use covers::{CarrierBinding, CoverObject};
pub use embedders::{capacity, embed, extract, EmbedReport, PatternSpec};
pub use message::SecretMessage;
