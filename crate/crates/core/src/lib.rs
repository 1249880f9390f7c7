//! Deterministic simulator of a circular sub-circle quantum sealed-bid auction.
//!
//! Every party splits the others into `l` sub-circles and sends one GHZ-based
//! travel sequence around each. Members encode their bid bits with Pauli
//! operators, and the initiator recovers them with a single joint
//! measurement. Decoy photons guard every hop.

pub mod adversary;
pub mod efficiency;
pub mod encoding;
pub mod protocol;
pub mod quantum_sim;
pub mod report;
pub mod topology;
pub mod transcript;
pub mod transport;
