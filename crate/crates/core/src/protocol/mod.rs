//! Wire format for running the signer and the user as separate processes.
//!
//! Frame: `kind u8 | length u32 LE | payload`, `length <= 2^26`. Payloads
//! reuse the matrix block and signature field encodings.

mod driver;

pub use driver::{mirrored_sources, run_signer, run_user, serve_session, Channel, ServePolicy, SignerService, UserRun};

use std::fmt;

use thiserror::Error;

use crate::codec::{pack_ternary, put_column, put_u32, read_bits, unpack_ternary, Reader};
use crate::error::{Error, Result};
use crate::params::Params;
use crate::scheme::RestartPayload;
use crate::zq::IntVector;

pub const PROTOCOL_VERSION: u8 = 0x01;
pub const MAX_PAYLOAD: u32 = 1 << 26;
pub const HEADER_LEN: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum Kind {
    Hello = 0x00,
    X = 0x01,
    E = 0x02,
    Z = 0x03,
    ResultAccept = 0x04,
    ResultRestart = 0x05,
    RestartX = 0x06,
    Abort = 0x7f,
}

impl Kind {
    pub const ALL: [Kind; 8] = [
        Kind::Hello,
        Kind::X,
        Kind::E,
        Kind::Z,
        Kind::ResultAccept,
        Kind::ResultRestart,
        Kind::RestartX,
        Kind::Abort,
    ];

    pub fn from_byte(b: u8) -> Option<Self> {
        Self::ALL.into_iter().find(|k| *k as u8 == b)
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Kind::Hello => "HELLO",
            Kind::X => "X",
            Kind::E => "E",
            Kind::Z => "Z",
            Kind::ResultAccept => "RESULT_ACCEPT",
            Kind::ResultRestart => "RESULT_RESTART",
            Kind::RestartX => "RESTART_X",
            Kind::Abort => "ABORT",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WireMessage {
    pub kind: Kind,
    pub payload: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecodeError {
    #[error("truncated frame: need {needed} bytes, have {have}")]
    Truncated { needed: usize, have: usize },
    #[error("unknown message kind 0x{0:02x}")]
    BadKind(u8),
    #[error("payload length {0} exceeds the 2^26 limit")]
    Oversize(u32),
    #[error("{0} trailing bytes after the frame")]
    Trailing(usize),
}

impl WireMessage {
    pub fn new(kind: Kind, payload: Vec<u8>) -> Self {
        Self { kind, payload }
    }

    pub fn encode(&self) -> Vec<u8> {
        assert!(self.payload.len() <= MAX_PAYLOAD as usize, "payload over the frame limit");
        let mut out = Vec::with_capacity(HEADER_LEN + self.payload.len());
        out.push(self.kind as u8);
        put_u32(&mut out, self.payload.len() as u32);
        out.extend_from_slice(&self.payload);
        out
    }

    /// Validates a frame header; returns the kind and payload length.
    pub fn parse_header(h: &[u8; HEADER_LEN]) -> Result<(Kind, usize), DecodeError> {
        let kind = Kind::from_byte(h[0]).ok_or(DecodeError::BadKind(h[0]))?;
        let len = u32::from_le_bytes([h[1], h[2], h[3], h[4]]);
        if len > MAX_PAYLOAD {
            return Err(DecodeError::Oversize(len));
        }
        Ok((kind, len as usize))
    }

    /// Decodes one frame from the front of `buf`, returning it and the
    /// number of bytes consumed.
    pub fn decode_prefix(buf: &[u8]) -> Result<(Self, usize), DecodeError> {
        let header: &[u8; HEADER_LEN] = buf
            .get(..HEADER_LEN)
            .and_then(|h| h.try_into().ok())
            .ok_or(DecodeError::Truncated { needed: HEADER_LEN, have: buf.len() })?;
        let (kind, len) = Self::parse_header(header)?;
        let total = HEADER_LEN + len;
        if buf.len() < total {
            return Err(DecodeError::Truncated { needed: total, have: buf.len() });
        }
        Ok((Self { kind, payload: buf[HEADER_LEN..total].to_vec() }, total))
    }

    /// Decodes exactly one frame.
    pub fn decode(buf: &[u8]) -> Result<Self, DecodeError> {
        let (msg, used) = Self::decode_prefix(buf)?;
        if used != buf.len() {
            return Err(DecodeError::Trailing(buf.len() - used));
        }
        Ok(msg)
    }
}

/// Typed protocol messages.
#[derive(Debug, Clone, PartialEq)]
pub enum Message {
    Hello { t: u64 },
    X(IntVector),
    E(IntVector),
    Z(IntVector),
    ResultAccept,
    ResultRestart(RestartPayload),
    RestartX(IntVector),
    Abort(String),
}

impl Message {
    pub fn kind(&self) -> Kind {
        match self {
            Message::Hello { .. } => Kind::Hello,
            Message::X(_) => Kind::X,
            Message::E(_) => Kind::E,
            Message::Z(_) => Kind::Z,
            Message::ResultAccept => Kind::ResultAccept,
            Message::ResultRestart(_) => Kind::ResultRestart,
            Message::RestartX(_) => Kind::RestartX,
            Message::Abort(_) => Kind::Abort,
        }
    }

    pub fn to_wire(&self) -> WireMessage {
        let mut p = Vec::new();
        match self {
            Message::Hello { t } => {
                p.push(PROTOCOL_VERSION);
                put_u32(&mut p, *t as u32);
            }
            Message::X(v) | Message::E(v) | Message::Z(v) | Message::RestartX(v) => put_column(&mut p, v),
            Message::ResultAccept => {}
            Message::ResultRestart(r) => {
                put_column(&mut p, &r.a);
                put_column(&mut p, &r.b);
                p.extend_from_slice(&pack_ternary(&r.e_prime));
                p.extend_from_slice(r.c.as_bytes());
            }
            Message::Abort(reason) => p.extend_from_slice(reason.as_bytes()),
        }
        WireMessage::new(self.kind(), p)
    }

    /// Parses a payload, checking every length against `params`. The
    /// HELLO payload is parsed without parameters by [`parse_hello`].
    pub fn from_wire(msg: &WireMessage, params: &Params) -> Result<Self> {
        let mut r = Reader::new(&msg.payload);
        let out = match msg.kind {
            Kind::Hello => Message::Hello { t: parse_hello(&msg.payload)? },
            Kind::X => Message::X(r.column(params.n, "x")?),
            Kind::RestartX => Message::RestartX(r.column(params.n, "x")?),
            Kind::E => Message::E(r.column(params.k, "e")?),
            Kind::Z => Message::Z(r.column(params.total_width(), "z")?),
            Kind::ResultAccept => Message::ResultAccept,
            Kind::ResultRestart => {
                let a = r.column(params.total_width(), "a")?;
                let b = r.column(params.k, "b")?;
                let e_prime = unpack_ternary(r.take(params.k.div_ceil(4))?, params.k)?;
                let c = read_bits(&mut r, crate::hash::commitment_bits(params.n), "c")?;
                Message::ResultRestart(RestartPayload { a, b, e_prime, c })
            }
            Kind::Abort => Message::Abort(String::from_utf8_lossy(&msg.payload).into_owned()),
        };
        if !matches!(msg.kind, Kind::Hello | Kind::Abort) {
            r.finish()?;
        }
        Ok(out)
    }
}

/// `version u8 | t u32 LE`.
pub fn parse_hello(payload: &[u8]) -> Result<u64> {
    let mut r = Reader::new(payload);
    let v = r.u8()?;
    if v != PROTOCOL_VERSION {
        return Err(Error::ProtocolViolation(format!("unsupported protocol version {v}")));
    }
    let t = r.u32()?;
    r.finish()?;
    Ok(t as u64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    UserToSigner,
    SignerToUser,
}

impl Kind {
    /// Which party sends this kind; ABORT may come from either side.
    pub fn sender(self) -> Option<Direction> {
        match self {
            Kind::Hello | Kind::E | Kind::ResultAccept | Kind::ResultRestart => Some(Direction::UserToSigner),
            Kind::X | Kind::Z | Kind::RestartX => Some(Direction::SignerToUser),
            Kind::Abort => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TranscriptEntry {
    pub direction: Direction,
    pub message: WireMessage,
    pub micros: u128,
}

/// Ordered record of the messages of one session.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Transcript {
    pub entries: Vec<TranscriptEntry>,
}

impl Transcript {
    pub fn kinds(&self) -> Vec<Kind> {
        self.entries.iter().map(|e| e.message.kind).collect()
    }

    /// Frames concatenated in order, without timing.
    pub fn to_bytes(&self) -> Vec<u8> {
        self.entries.iter().flat_map(|e| e.message.encode()).collect()
    }

    pub fn check_grammar(&self) -> Result<(), String> {
        for e in &self.entries {
            if let Some(d) = e.message.kind.sender() {
                if d != e.direction {
                    return Err(format!("{} sent in the wrong direction", e.message.kind));
                }
            }
        }
        check_grammar(&self.kinds())
    }
}

/// Session grammar: `HELLO X (E (RESTART_X | Z (RESULT_ACCEPT | RESULT_RESTART RESTART_X)))*`
/// ending right after RESULT_ACCEPT, with ABORT allowed as the final message
/// anywhere. Returns `Ok` for complete sessions only.
pub fn check_grammar(kinds: &[Kind]) -> Result<(), String> {
    #[derive(Clone, Copy, PartialEq, Debug)]
    enum S {
        Start,
        AfterHello,
        AwaitE,
        AfterE,
        AfterZ,
        AfterRestartReq,
        Accepted,
        Aborted,
    }
    let mut s = S::Start;
    for (i, &k) in kinds.iter().enumerate() {
        s = match (s, k) {
            (S::Accepted | S::Aborted, _) => return Err(format!("message {i} ({k}) after the session ended")),
            (_, Kind::Abort) => S::Aborted,
            (S::Start, Kind::Hello) => S::AfterHello,
            (S::AfterHello, Kind::X) => S::AwaitE,
            (S::AwaitE, Kind::E) => S::AfterE,
            (S::AfterE, Kind::RestartX) => S::AwaitE,
            (S::AfterE, Kind::Z) => S::AfterZ,
            (S::AfterZ, Kind::ResultAccept) => S::Accepted,
            (S::AfterZ, Kind::ResultRestart) => S::AfterRestartReq,
            (S::AfterRestartReq, Kind::RestartX) => S::AwaitE,
            (st, k) => return Err(format!("message {i} ({k}) not allowed in state {st:?}")),
        };
    }
    match s {
        S::Accepted | S::Aborted => Ok(()),
        st => Err(format!("session incomplete, stopped in state {st:?}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frame_layout() {
        let m = WireMessage::new(Kind::E, vec![9, 8, 7]);
        let b = m.encode();
        assert_eq!(b, vec![0x02, 3, 0, 0, 0, 9, 8, 7]);
        assert_eq!(WireMessage::decode(&b).unwrap(), m);
    }

    #[test]
    fn decode_errors_are_structured() {
        assert_eq!(WireMessage::decode(&[0x01, 5, 0]), Err(DecodeError::Truncated { needed: 5, have: 3 }));
        assert_eq!(WireMessage::decode(&[0x01, 2, 0, 0, 0, 1]), Err(DecodeError::Truncated { needed: 7, have: 6 }));
        assert_eq!(WireMessage::decode(&[0x09, 0, 0, 0, 0]), Err(DecodeError::BadKind(0x09)));
        assert_eq!(WireMessage::decode(&[0x00, 1, 0, 0, 4]), Err(DecodeError::Oversize((1 << 26) + 1)));
        assert_eq!(WireMessage::decode(&[0x04, 0, 0, 0, 0, 0]), Err(DecodeError::Trailing(1)));
    }

    #[test]
    fn hello_payload() {
        let w = Message::Hello { t: 3 }.to_wire();
        assert_eq!(w.payload, vec![1, 3, 0, 0, 0]);
        assert_eq!(parse_hello(&w.payload).unwrap(), 3);
        assert!(parse_hello(&[2, 3, 0, 0, 0]).is_err());
    }

    #[test]
    fn grammar() {
        use Kind::*;
        assert!(check_grammar(&[Hello, X, E, Z, ResultAccept]).is_ok());
        assert!(check_grammar(&[Hello, X, E, RestartX, E, Z, ResultRestart, RestartX, E, Z, ResultAccept]).is_ok());
        assert!(check_grammar(&[Hello, X, E, Abort]).is_ok());
        assert!(check_grammar(&[Hello, X, Z]).is_err());
        assert!(check_grammar(&[Hello, X, E, Z]).is_err());
        assert!(check_grammar(&[Hello, X, E, Z, ResultAccept, E]).is_err());
        assert!(check_grammar(&[X]).is_err());
    }
}
