//! Simulated unreliable fax channel with delivery tracking, stall detection
//! and resend. Losses are silent: nothing NACKs, so a lost fax is found only
//! when its acknowledgment timeout expires. Transit takes a fixed 1 minute
//! so traces stay strictly ordered.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::SplitMix64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Destination {
    Vendor,
    ReceivingDept,
    Installer,
    Measurer,
}

impl fmt::Display for Destination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Destination::Vendor => "vendor",
            Destination::ReceivingDept => "receiving_dept",
            Destination::Installer => "installer",
            Destination::Measurer => "measurer",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PayloadProfile {
    FullDetail,
    Summary,
}

impl fmt::Display for PayloadProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PayloadProfile::FullDetail => "full_detail",
            PayloadProfile::Summary => "summary",
        })
    }
}

/// Vendor, installer and measurer need the full order; the receiving dept
/// only ever gets a summary sheet.
pub fn profile_for(destination: Destination) -> PayloadProfile {
    match destination {
        Destination::ReceivingDept => PayloadProfile::Summary,
        _ => PayloadProfile::FullDetail,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct MessageId(pub u64);

impl fmt::Display for MessageId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FaxMessage {
    pub id: MessageId,
    pub order_id: u64,
    pub destination: Destination,
    pub payload_profile: PayloadProfile,
    pub sent_at: u64,
    pub attempt: u32,
}

#[derive(Debug, Clone, Copy)]
pub struct ChannelConfig {
    pub loss_probability: f64,
    /// Minutes before a missing acknowledgment counts as a stall. Default is
    /// two business days.
    pub ack_timeout: u64,
    pub max_attempts: u32,
}

pub const DEFAULT_ACK_TIMEOUT_MIN: u64 = 2880;
pub const DEFAULT_MAX_ATTEMPTS: u32 = 5;

impl Default for ChannelConfig {
    fn default() -> Self {
        ChannelConfig {
            loss_probability: 0.0,
            ack_timeout: DEFAULT_ACK_TIMEOUT_MIN,
            max_attempts: DEFAULT_MAX_ATTEMPTS,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeliveryStatus {
    InFlight,
    Delivered,
    Lost,
    ResentAs(MessageId),
    Abandoned,
}

/// What happened on the wire, in channel time order. `Sent` covers both
/// first sends and automatic resends.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ChannelEventKind {
    Sent { resent_from: Option<MessageId> },
    Delivered,
    Lost,
    /// Gave up after max attempts; surfaces as an operator alert.
    Abandoned,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChannelEvent {
    pub time: u64,
    pub kind: ChannelEventKind,
    pub id: MessageId,
    pub sender: String,
    pub destination: Destination,
    pub order_id: u64,
    pub attempt: u32,
    pub payload: PayloadProfile,
}

#[derive(Debug, Clone)]
struct MsgRecord {
    msg: FaxMessage,
    sender: String,
    status: DeliveryStatus,
    will_deliver: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Pending {
    /// Transit outcome becomes visible (delivered or silently lost).
    Fate(MessageId),
    /// Ack-timeout check for one message.
    Sweep(MessageId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct StatusCounts {
    pub in_flight: u64,
    pub delivered: u64,
    pub lost: u64,
    pub resent: u64,
    pub abandoned: u64,
}

impl StatusCounts {
    pub fn total(&self) -> u64 {
        self.in_flight + self.delivered + self.lost + self.resent + self.abandoned
    }
}

/// One run's fax channel. All randomness flows from the construction seed.
#[derive(Debug, Clone)]
pub struct Channel {
    cfg: ChannelConfig,
    rng: SplitMix64,
    records: BTreeMap<MessageId, MsgRecord>,
    pending: BTreeMap<(u64, u64), Pending>,
    next_id: u64,
    next_seq: u64,
}

impl Channel {
    pub fn new(cfg: ChannelConfig, seed: u64) -> Self {
        Channel {
            cfg,
            rng: SplitMix64::new(seed),
            records: BTreeMap::new(),
            pending: BTreeMap::new(),
            next_id: 1,
            next_seq: 0,
        }
    }

    pub fn config(&self) -> &ChannelConfig {
        &self.cfg
    }

    fn schedule(&mut self, time: u64, item: Pending) {
        self.pending.insert((time, self.next_seq), item);
        self.next_seq += 1;
    }

    fn send_inner(
        &mut self,
        sender: &str,
        order_id: u64,
        destination: Destination,
        now: u64,
        attempt: u32,
        resent_from: Option<MessageId>,
    ) -> ChannelEvent {
        let id = MessageId(self.next_id);
        self.next_id += 1;
        let payload = profile_for(destination);
        let will_deliver = !self.rng.chance(self.cfg.loss_probability);
        let msg = FaxMessage {
            id,
            order_id,
            destination,
            payload_profile: payload,
            sent_at: now,
            attempt,
        };
        self.records.insert(
            id,
            MsgRecord {
                msg,
                sender: String::from(sender),
                status: DeliveryStatus::InFlight,
                will_deliver,
            },
        );
        self.schedule(now + 1, Pending::Fate(id));
        self.schedule(now + self.cfg.ack_timeout + 1, Pending::Sweep(id));
        ChannelEvent {
            time: now,
            kind: ChannelEventKind::Sent { resent_from },
            id,
            sender: String::from(sender),
            destination,
            order_id,
            attempt,
            payload,
        }
    }

    /// Put a fax on the wire. The loss draw happens here, seeded; the
    /// outcome stays invisible until transit completes.
    pub fn send(
        &mut self,
        sender: &str,
        order_id: u64,
        destination: Destination,
        now: u64,
    ) -> ChannelEvent {
        self.send_inner(sender, order_id, destination, now, 1, None)
    }

    /// Earliest instant at which the channel has something to do.
    pub fn next_pending(&self) -> Option<u64> {
        self.pending.keys().next().map(|(t, _)| *t)
    }

    pub fn is_idle(&self) -> bool {
        self.pending.is_empty()
    }

    /// Every in-flight-or-lost message past its ack timeout that still has a
    /// resend budget. Messages at the attempt cap are not listed; the sweep
    /// abandons them instead.
    pub fn detect_stalled(&self, now: u64) -> Vec<MessageId> {
        self.records
            .values()
            .filter(|r| {
                matches!(r.status, DeliveryStatus::InFlight | DeliveryStatus::Lost)
                    && now.saturating_sub(r.msg.sent_at) > self.cfg.ack_timeout
                    && r.msg.attempt < self.cfg.max_attempts
            })
            .map(|r| r.msg.id)
            .collect()
    }

    /// Process everything due at or before `now`, in schedule order.
    /// Resends triggered here put fresh messages on the wire, which may in
    /// turn come due within the same call.
    pub fn drain_due(&mut self, now: u64) -> Vec<ChannelEvent> {
        let mut out = Vec::new();
        while let Some((&key, _)) = self.pending.range(..=(now, u64::MAX)).next() {
            let item = self.pending.remove(&key).expect("key just seen");
            let time = key.0;
            match item {
                Pending::Fate(id) => {
                    let rec = self.records.get_mut(&id).expect("fate for known message");
                    debug_assert_eq!(rec.status, DeliveryStatus::InFlight);
                    let (status, kind) = if rec.will_deliver {
                        (DeliveryStatus::Delivered, ChannelEventKind::Delivered)
                    } else {
                        (DeliveryStatus::Lost, ChannelEventKind::Lost)
                    };
                    rec.status = status;
                    out.push(ChannelEvent {
                        time,
                        kind,
                        id,
                        sender: rec.sender.clone(),
                        destination: rec.msg.destination,
                        order_id: rec.msg.order_id,
                        attempt: rec.msg.attempt,
                        payload: rec.msg.payload_profile,
                    });
                }
                Pending::Sweep(id) => {
                    let rec = self.records.get(&id).expect("sweep for known message");
                    if rec.status != DeliveryStatus::Lost {
                        continue;
                    }
                    let (sender, order_id, destination, attempt) = (
                        rec.sender.clone(),
                        rec.msg.order_id,
                        rec.msg.destination,
                        rec.msg.attempt,
                    );
                    if attempt < self.cfg.max_attempts {
                        let sent = self.send_inner(
                            &sender,
                            order_id,
                            destination,
                            time,
                            attempt + 1,
                            Some(id),
                        );
                        let new_id = sent.id;
                        out.push(sent);
                        self.records.get_mut(&id).expect("still present").status =
                            DeliveryStatus::ResentAs(new_id);
                    } else {
                        self.records.get_mut(&id).expect("still present").status =
                            DeliveryStatus::Abandoned;
                        out.push(ChannelEvent {
                            time,
                            kind: ChannelEventKind::Abandoned,
                            id,
                            sender,
                            destination,
                            order_id,
                            attempt,
                            payload: profile_for(destination),
                        });
                    }
                }
            }
        }
        debug_assert_eq!(self.counts().total(), self.total_sent());
        out
    }

    pub fn status(&self, id: MessageId) -> Option<DeliveryStatus> {
        self.records.get(&id).map(|r| r.status)
    }

    pub fn message(&self, id: MessageId) -> Option<&FaxMessage> {
        self.records.get(&id).map(|r| &r.msg)
    }

    pub fn total_sent(&self) -> u64 {
        self.records.len() as u64
    }

    /// Status tally; `total()` always equals `total_sent()`.
    pub fn counts(&self) -> StatusCounts {
        let mut c = StatusCounts::default();
        for r in self.records.values() {
            match r.status {
                DeliveryStatus::InFlight => c.in_flight += 1,
                DeliveryStatus::Delivered => c.delivered += 1,
                DeliveryStatus::Lost => c.lost += 1,
                DeliveryStatus::ResentAs(_) => c.resent += 1,
                DeliveryStatus::Abandoned => c.abandoned += 1,
            }
        }
        c
    }
}
