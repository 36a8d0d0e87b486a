use core::fmt;

use crate::varint::VARINT_MAX;

/// A QUIC packet number, `0 <= value < 2^62`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PacketNumber(pub u64);

impl PacketNumber {
    pub const MAX: PacketNumber = PacketNumber(VARINT_MAX);

    pub fn value(self) -> u64 {
        self.0
    }
}

impl fmt::Display for PacketNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

impl From<u64> for PacketNumber {
    fn from(v: u64) -> Self {
        PacketNumber(v)
    }
}

/// Index of a path within a connection, `0..number_of_paths`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PathId(pub u32);

impl PathId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for PathId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Identifier of a packet number space.
///
/// Under SPNS there is one connection-wide space (`SpaceId(0)`); under MPNS
/// each path owns the space with the same index.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SpaceId(pub u32);

impl SpaceId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum SpaceMode {
    /// Single packet number space shared by all paths.
    #[default]
    Spns,
    /// One packet number space per path.
    Mpns,
}

impl SpaceMode {
    /// The space a packet sent or received on `path` belongs to.
    pub fn space_of(self, path: PathId) -> SpaceId {
        match self {
            SpaceMode::Spns => SpaceId(0),
            SpaceMode::Mpns => SpaceId(path.0),
        }
    }

    pub fn space_count(self, paths: usize) -> usize {
        match self {
            SpaceMode::Spns => 1,
            SpaceMode::Mpns => paths,
        }
    }
}

impl fmt::Display for SpaceMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SpaceMode::Spns => "SPNS",
            SpaceMode::Mpns => "MPNS",
        })
    }
}
