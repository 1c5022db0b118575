use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Training-set variants, in order of increasing content.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TrainVariant {
    Baseline,
    Viewpoints,
    AngledGrids,
    Lines,
    Final,
}

impl TrainVariant {
    pub const ALL: [TrainVariant; 5] = [
        TrainVariant::Baseline,
        TrainVariant::Viewpoints,
        TrainVariant::AngledGrids,
        TrainVariant::Lines,
        TrainVariant::Final,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TrainVariant::Baseline => "Baseline",
            TrainVariant::Viewpoints => "Viewpoints",
            TrainVariant::AngledGrids => "AngledGrids",
            TrainVariant::Lines => "Lines",
            TrainVariant::Final => "Final",
        }
    }
}

impl FromStr for TrainVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|v| v.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownTag(s.to_string()))
    }
}

impl fmt::Display for TrainVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Narrowly scoped and general test sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TestSet {
    Base,
    Resolutions,
    AngledGrids,
    Lines,
    Viewpoints,
    AccViewpoints,
    Full,
    GeneralGrids,
    GeneralViews,
}

impl TestSet {
    pub const ALL: [TestSet; 9] = [
        TestSet::Base,
        TestSet::Resolutions,
        TestSet::AngledGrids,
        TestSet::Lines,
        TestSet::Viewpoints,
        TestSet::AccViewpoints,
        TestSet::Full,
        TestSet::GeneralGrids,
        TestSet::GeneralViews,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TestSet::Base => "Base",
            TestSet::Resolutions => "Resolutions",
            TestSet::AngledGrids => "AngledGrids",
            TestSet::Lines => "Lines",
            TestSet::Viewpoints => "Viewpoints",
            TestSet::AccViewpoints => "AccViewpoints",
            TestSet::Full => "Full",
            TestSet::GeneralGrids => "GeneralGrids",
            TestSet::GeneralViews => "GeneralViews",
        }
    }
}

impl FromStr for TestSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|v| v.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownTag(s.to_string()))
    }
}

impl fmt::Display for TestSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Membership label on a manifest record. Written as `train/<variant>`,
/// `val/<variant>` or `test/<set>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SubsetTag {
    Train(TrainVariant),
    Val(TrainVariant),
    Test(TestSet),
}

impl fmt::Display for SubsetTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SubsetTag::Train(v) => write!(f, "train/{v}"),
            SubsetTag::Val(v) => write!(f, "val/{v}"),
            SubsetTag::Test(t) => write!(f, "test/{t}"),
        }
    }
}

impl FromStr for SubsetTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let unknown = || Error::UnknownTag(s.to_string());
        let (kind, name) = s.split_once('/').ok_or_else(unknown)?;
        match kind {
            "train" => Ok(SubsetTag::Train(name.parse().map_err(|_| unknown())?)),
            "val" => Ok(SubsetTag::Val(name.parse().map_err(|_| unknown())?)),
            "test" => Ok(SubsetTag::Test(name.parse().map_err(|_| unknown())?)),
            _ => Err(unknown()),
        }
    }
}

impl Serialize for SubsetTag {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for SubsetTag {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
