//! Three-party execution shape: one joint preparation, one public broadcast
//! from Alice to both provers, one reply from each prover. Any other
//! inter-party edge violates the isolation contract and fails the run.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PartyId {
    Alice,
    Bob,
    Charlie,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum EventKind {
    Preparation,
    Broadcast,
    Reply(PartyId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    Setup,
    Broadcasted,
}

/// Message log and contract enforcement for one protocol run.
#[derive(Debug)]
pub struct Runtime {
    events: Vec<EventKind>,
    phase: Phase,
    replied: Vec<PartyId>,
}

impl Runtime {
    pub fn new() -> Self {
        Runtime {
            events: Vec::new(),
            phase: Phase::Setup,
            replied: Vec::new(),
        }
    }

    /// The single joint preparation step, before any broadcast.
    pub fn record_preparation(&mut self) -> Result<()> {
        if self.phase != Phase::Setup || self.events.contains(&EventKind::Preparation) {
            return Err(Error::IsolationViolation(
                "preparation must happen exactly once, before the broadcast".into(),
            ));
        }
        self.events.push(EventKind::Preparation);
        Ok(())
    }

    /// Alice's public broadcast; both receivers must get bit-identical
    /// payloads.
    pub fn broadcast(&mut self, to_bob: &[u8], to_charlie: &[u8]) -> Result<()> {
        if self.phase != Phase::Setup {
            return Err(Error::IsolationViolation(
                "broadcast already happened".into(),
            ));
        }
        if to_bob != to_charlie {
            return Err(Error::IsolationViolation(
                "broadcast payloads to Bob and Charlie differ".into(),
            ));
        }
        self.events.push(EventKind::Broadcast);
        self.phase = Phase::Broadcasted;
        Ok(())
    }

    /// One reply per prover, only after the broadcast.
    pub fn reply(&mut self, from: PartyId) -> Result<()> {
        if from == PartyId::Alice {
            return Err(Error::IsolationViolation("Alice does not reply".into()));
        }
        if self.phase != Phase::Broadcasted {
            return Err(Error::IsolationViolation(
                "replies are only allowed after the broadcast".into(),
            ));
        }
        if self.replied.contains(&from) {
            return Err(Error::IsolationViolation(format!(
                "{from:?} already replied"
            )));
        }
        self.replied.push(from);
        self.events.push(EventKind::Reply(from));
        Ok(())
    }

    /// Any direct prover-to-prover (or prover-to-prover-via-Alice) message is
    /// forbidden once the preparation is done.
    pub fn cross_message(&mut self, from: PartyId, to: PartyId) -> Result<()> {
        Err(Error::IsolationViolation(format!(
            "forbidden message {from:?} → {to:?} after preparation"
        )))
    }

    pub fn events(&self) -> &[EventKind] {
        &self.events
    }

    /// (preparations, broadcasts, replies) seen so far.
    pub fn counts(&self) -> (usize, usize, usize) {
        let p = self
            .events
            .iter()
            .filter(|e| **e == EventKind::Preparation)
            .count();
        let b = self
            .events
            .iter()
            .filter(|e| **e == EventKind::Broadcast)
            .count();
        let r = self
            .events
            .iter()
            .filter(|e| matches!(e, EventKind::Reply(_)))
            .count();
        (p, b, r)
    }
}

impl Default for Runtime {
    fn default() -> Self {
        Self::new()
    }
}
