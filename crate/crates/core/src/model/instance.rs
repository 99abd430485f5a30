use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How inter-city distances are derived from coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EdgeWeightKind {
    /// Euclidean distance rounded up to the next integer.
    #[serde(rename = "CEIL_2D")]
    Ceil2d,
    /// Exact Euclidean distance.
    #[serde(rename = "EUC_2D")]
    Euc2d,
}

impl EdgeWeightKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EdgeWeightKind::Ceil2d => "CEIL_2D",
            EdgeWeightKind::Euc2d => "EUC_2D",
        }
    }
}

impl FromStr for EdgeWeightKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "CEIL_2D" => Ok(EdgeWeightKind::Ceil2d),
            "EUC_2D" => Ok(EdgeWeightKind::Euc2d),
            other => Err(Error::Validation(format!(
                "unsupported edge weight type {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct City {
    /// 1-based city index.
    pub index: usize,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Item {
    /// 1-based item id.
    pub id: usize,
    pub profit: f64,
    pub weight: f64,
    /// 1-based index of the city holding the item.
    pub city: usize,
}

/// A packing-while-travelling instance: cities, items and the vehicle model.
///
/// Cities are stored in index order (`cities[c - 1].index == c`) and items in
/// id order (`items[j].id == j + 1`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub name: String,
    /// Free-form `KNAPSACK DATA TYPE` annotation carried through from the file.
    pub knapsack_data_type: Option<String>,
    pub cities: Vec<City>,
    pub items: Vec<Item>,
    pub capacity: f64,
    pub renting_rate: f64,
    pub v_max: f64,
    pub v_min: f64,
    pub edge_weight_kind: EdgeWeightKind,
}

impl Instance {
    pub fn city_count(&self) -> usize {
        self.cities.len()
    }

    pub fn item_count(&self) -> usize {
        self.items.len()
    }

    /// Speed loss per unit of carried weight, `(v_max - v_min) / B`.
    pub fn nu(&self) -> f64 {
        (self.v_max - self.v_min) / self.capacity
    }

    pub fn total_item_weight(&self) -> f64 {
        self.items.iter().map(|it| it.weight).sum()
    }

    /// Distance between two 1-based city indices.
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return 0.0;
        }
        let a = &self.cities[i - 1];
        let b = &self.cities[j - 1];
        let exact = (a.x - b.x).hypot(a.y - b.y);
        match self.edge_weight_kind {
            EdgeWeightKind::Euc2d => exact,
            EdgeWeightKind::Ceil2d => exact.ceil(),
        }
    }

    /// Checks the structural and numeric invariants of the instance.
    pub fn validate(&self) -> Result<()> {
        let n = self.cities.len();
        if n < 2 {
            return Err(Error::Validation(format!(
                "instance needs at least 2 cities, found {n}"
            )));
        }
        for (k, city) in self.cities.iter().enumerate() {
            if city.index != k + 1 {
                return Err(Error::Validation(format!(
                    "city at slot {} has index {}",
                    k + 1,
                    city.index
                )));
            }
            if !city.x.is_finite() || !city.y.is_finite() {
                return Err(Error::Validation(format!(
                    "city {} has non-finite coordinates",
                    city.index
                )));
            }
        }
        if !(self.v_min > 0.0 && self.v_max > self.v_min) {
            return Err(Error::Validation(format!(
                "speeds must satisfy v_max > v_min > 0 (got v_max={}, v_min={})",
                self.v_max, self.v_min
            )));
        }
        // A zero capacity is admitted: only the empty plan is then feasible.
        if !(self.capacity >= 0.0) || !self.capacity.is_finite() {
            return Err(Error::Validation(format!(
                "capacity must be finite and nonnegative, got {}",
                self.capacity
            )));
        }
        if !(self.renting_rate >= 0.0) || !self.renting_rate.is_finite() {
            return Err(Error::Validation(format!(
                "renting rate must be finite and nonnegative, got {}",
                self.renting_rate
            )));
        }
        for (k, item) in self.items.iter().enumerate() {
            if item.id != k + 1 {
                return Err(Error::Validation(format!(
                    "item at slot {} has id {}",
                    k + 1,
                    item.id
                )));
            }
            if item.city < 2 || item.city > n {
                return Err(Error::Validation(format!(
                    "item {} is assigned to city {}, expected a city in [2, {n}]",
                    item.id, item.city
                )));
            }
            if !(item.profit > 0.0 && item.profit.is_finite()) {
                return Err(Error::Validation(format!(
                    "item {} has nonpositive profit {}",
                    item.id, item.profit
                )));
            }
            if !(item.weight > 0.0 && item.weight.is_finite()) {
                return Err(Error::Validation(format!(
                    "item {} has nonpositive weight {}",
                    item.id, item.weight
                )));
            }
        }
        Ok(())
    }

    /// Serializes the instance in the TTP benchmark layout accepted by [`parse_instance`].
    pub fn to_ttp_string(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "PROBLEM NAME:\t{}", self.name);
        if let Some(kind) = &self.knapsack_data_type {
            let _ = writeln!(out, "KNAPSACK DATA TYPE:\t{kind}");
        }
        let _ = writeln!(out, "DIMENSION:\t{}", self.cities.len());
        let _ = writeln!(out, "NUMBER OF ITEMS:\t{}", self.items.len());
        let _ = writeln!(out, "CAPACITY OF KNAPSACK:\t{}", self.capacity);
        let _ = writeln!(out, "MIN SPEED:\t{}", self.v_min);
        let _ = writeln!(out, "MAX SPEED:\t{}", self.v_max);
        let _ = writeln!(out, "RENTING RATIO:\t{}", self.renting_rate);
        let _ = writeln!(out, "EDGE_WEIGHT_TYPE:\t{}", self.edge_weight_kind.as_str());
        let _ = writeln!(out, "NODE_COORD_SECTION\t(INDEX, X, Y):");
        for c in &self.cities {
            let _ = writeln!(out, "{}\t{}\t{}", c.index, c.x, c.y);
        }
        let _ = writeln!(
            out,
            "ITEMS SECTION\t(INDEX, PROFIT, WEIGHT, ASSIGNED NODE NUMBER):"
        );
        for it in &self.items {
            let _ = writeln!(out, "{}\t{}\t{}\t{}", it.id, it.profit, it.weight, it.city);
        }
        out
    }
}

#[derive(Default)]
struct Header {
    name: Option<String>,
    data_type: Option<String>,
    dimension: Option<usize>,
    items: Option<usize>,
    capacity: Option<f64>,
    v_min: Option<f64>,
    v_max: Option<f64>,
    renting: Option<f64>,
    kind: Option<EdgeWeightKind>,
}

enum Section {
    Header,
    Nodes,
    Items,
}

fn parse_num<T: FromStr>(token: &str, line: usize, what: &str) -> Result<T> {
    token.trim().parse().map_err(|_| Error::Parse {
        line,
        message: format!("cannot read {what} from {token:?}"),
    })
}

/// Parses an instance in the TTP benchmark layout.
///
/// Header keys are matched up to the first `:`; separators may be tabs or
/// spaces and section headers may carry trailing annotations such as
/// `(INDEX, X, Y):`. Unknown header keys are ignored.
pub fn parse_instance(text: &str) -> Result<Instance> {
    let mut header = Header::default();
    let mut section = Section::Header;
    let mut cities: Vec<(usize, City)> = Vec::new();
    let mut items: Vec<(usize, Item)> = Vec::new();

    for (k, raw) in text.lines().enumerate() {
        let line_no = k + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with("NODE_COORD_SECTION") {
            section = Section::Nodes;
            continue;
        }
        if line.starts_with("ITEMS SECTION") {
            section = Section::Items;
            continue;
        }
        if line == "EOF" {
            break;
        }
        match section {
            Section::Header => {
                let (key, value) = line.split_once(':').ok_or_else(|| Error::Parse {
                    line: line_no,
                    message: format!("expected `KEY: value`, found {line:?}"),
                })?;
                let key = key.split_whitespace().collect::<Vec<_>>().join(" ");
                let value = value.trim();
                match key.as_str() {
                    "PROBLEM NAME" => header.name = Some(value.to_string()),
                    "KNAPSACK DATA TYPE" => header.data_type = Some(value.to_string()),
                    "DIMENSION" => header.dimension = Some(parse_num(value, line_no, "DIMENSION")?),
                    "NUMBER OF ITEMS" => {
                        header.items = Some(parse_num(value, line_no, "NUMBER OF ITEMS")?)
                    }
                    "CAPACITY OF KNAPSACK" => {
                        header.capacity = Some(parse_num(value, line_no, "CAPACITY OF KNAPSACK")?)
                    }
                    "MIN SPEED" => header.v_min = Some(parse_num(value, line_no, "MIN SPEED")?),
                    "MAX SPEED" => header.v_max = Some(parse_num(value, line_no, "MAX SPEED")?),
                    "RENTING RATIO" => {
                        header.renting = Some(parse_num(value, line_no, "RENTING RATIO")?)
                    }
                    "EDGE_WEIGHT_TYPE" => {
                        header.kind = Some(value.parse().map_err(|e: Error| Error::Parse {
                            line: line_no,
                            message: e.to_string(),
                        })?)
                    }
                    _ => {}
                }
            }
            Section::Nodes => {
                let fields: Vec<&str> = line.split_whitespace().collect();
                if fields.len() != 3 {
                    return Err(Error::Parse {
                        line: line_no,
                        message: format!("expected `index x y`, found {line:?}"),
                    });
                }
                let index: usize = parse_num(fields[0], line_no, "city index")?;
                let x = parse_num(fields[1], line_no, "x coordinate")?;
                let y = parse_num(fields[2], line_no, "y coordinate")?;
                cities.push((line_no, City { index, x, y }));
            }
            Section::Items => {
                let fields: Vec<&str> = line.split_whitespace().collect();
                if fields.len() != 4 {
                    return Err(Error::Parse {
                        line: line_no,
                        message: format!("expected `index profit weight node`, found {line:?}"),
                    });
                }
                let item = Item {
                    id: parse_num(fields[0], line_no, "item index")?,
                    profit: parse_num(fields[1], line_no, "profit")?,
                    weight: parse_num(fields[2], line_no, "weight")?,
                    city: parse_num(fields[3], line_no, "assigned node")?,
                };
                items.push((line_no, item));
            }
        }
    }

    let missing = |key: &str| Error::Structure(format!("missing header field {key}"));
    let dimension = header.dimension.ok_or_else(|| missing("DIMENSION"))?;
    let item_count = header.items.ok_or_else(|| missing("NUMBER OF ITEMS"))?;
    let capacity = header
        .capacity
        .ok_or_else(|| missing("CAPACITY OF KNAPSACK"))?;
    let v_min = header.v_min.ok_or_else(|| missing("MIN SPEED"))?;
    let v_max = header.v_max.ok_or_else(|| missing("MAX SPEED"))?;
    let renting_rate = header.renting.ok_or_else(|| missing("RENTING RATIO"))?;
    let edge_weight_kind = header.kind.ok_or_else(|| missing("EDGE_WEIGHT_TYPE"))?;

    if cities.len() != dimension {
        return Err(Error::Structure(format!(
            "DIMENSION is {dimension} but {} coordinate lines were found",
            cities.len()
        )));
    }
    if items.len() != item_count {
        return Err(Error::Structure(format!(
            "NUMBER OF ITEMS is {item_count} but {} item lines were found",
            items.len()
        )));
    }

    let mut city_slots: Vec<Option<City>> = vec![None; dimension];
    for (line, city) in cities {
        if city.index == 0 || city.index > dimension {
            return Err(Error::Parse {
                line,
                message: format!("city index {} outside [1, {dimension}]", city.index),
            });
        }
        if city_slots[city.index - 1].replace(city).is_some() {
            return Err(Error::Parse {
                line,
                message: format!("city index {} listed twice", city.index),
            });
        }
    }
    let mut item_slots: Vec<Option<Item>> = vec![None; item_count];
    for (line, item) in items {
        if item.id == 0 || item.id > item_count {
            return Err(Error::Parse {
                line,
                message: format!("item index {} outside [1, {item_count}]", item.id),
            });
        }
        if item_slots[item.id - 1].replace(item).is_some() {
            return Err(Error::Parse {
                line,
                message: format!("item index {} listed twice", item.id),
            });
        }
    }

    let instance = Instance {
        name: header.name.unwrap_or_default(),
        knapsack_data_type: header.data_type,
        // Every slot is filled: counts match and indices are unique and in range.
        cities: city_slots.into_iter().map(Option::unwrap).collect(),
        items: item_slots.into_iter().map(Option::unwrap).collect(),
        capacity,
        renting_rate,
        v_max,
        v_min,
        edge_weight_kind,
    };
    instance.validate()?;
    Ok(instance)
}

impl FromStr for Instance {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_instance(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::toy4;

    #[test]
    fn parses_toy4_fixture() {
        let inst = parse_instance(&toy4().to_ttp_string()).unwrap();
        assert_eq!(inst.city_count(), 4);
        assert_eq!(inst.item_count(), 3);
        assert_eq!(inst.capacity, 15.0);
        assert_eq!(inst.renting_rate, 1.0);
        assert_eq!(inst.v_max, 1.0);
        assert_eq!(inst.v_min, 0.1);
        assert_eq!(inst.edge_weight_kind, EdgeWeightKind::Euc2d);
        assert_eq!(
            inst.items[0],
            Item {
                id: 1,
                profit: 50.0,
                weight: 10.0,
                city: 2
            }
        );
        assert_eq!(inst, toy4());
    }

    #[test]
    fn tolerates_benchmark_whitespace() {
        let text = "PROBLEM NAME: \tsample-TTP\n\
                    KNAPSACK DATA TYPE: bounded strongly corr\n\
                    DIMENSION:\t3\n\
                    NUMBER OF ITEMS: \t2\n\
                    CAPACITY OF KNAPSACK: \t100\n\
                    MIN SPEED: \t0.1\n\
                    MAX SPEED: \t1\n\
                    RENTING RATIO: \t5.61\n\
                    EDGE_WEIGHT_TYPE:\tCEIL_2D\n\
                    NODE_COORD_SECTION\t(INDEX, X, Y): \n\
                    1\t37\t52\n\
                    2 49   49\n\
                    3\t52\t64\n\
                    ITEMS SECTION\t(INDEX, PROFIT, WEIGHT, ASSIGNED NODE NUMBER): \n\
                    1\t101\t1\t2\n\
                    2\t202\t102\t3\n";
        let inst = parse_instance(text).unwrap();
        assert_eq!(inst.edge_weight_kind, EdgeWeightKind::Ceil2d);
        assert_eq!(inst.name, "sample-TTP");
        assert_eq!(
            inst.knapsack_data_type.as_deref(),
            Some("bounded strongly corr")
        );
        assert_eq!(inst.renting_rate, 5.61);
        assert_eq!(inst.items[1].city, 3);
    }

    #[test]
    fn item_count_mismatch_is_structural() {
        let text = toy4()
            .to_ttp_string()
            .replace("NUMBER OF ITEMS:\t3", "NUMBER OF ITEMS:\t5");
        assert!(matches!(parse_instance(&text), Err(Error::Structure(_))));
    }

    #[test]
    fn malformed_header_names_line() {
        let text = toy4()
            .to_ttp_string()
            .replace("DIMENSION:\t4", "DIMENSION 4");
        assert_eq!(
            parse_instance(&text).unwrap_err(),
            Error::Parse {
                line: 2,
                message: "expected `KEY: value`, found \"DIMENSION 4\"".into()
            }
        );
        let text = toy4()
            .to_ttp_string()
            .replace("MIN SPEED:\t0.1", "MIN SPEED:\tslow");
        assert!(matches!(
            parse_instance(&text),
            Err(Error::Parse { line: 5, .. })
        ));
    }

    #[test]
    fn items_in_first_or_unknown_city_are_rejected() {
        let text = toy4()
            .to_ttp_string()
            .replace("1\t50\t10\t2", "1\t50\t10\t1");
        assert!(matches!(parse_instance(&text), Err(Error::Validation(_))));
        let text = toy4()
            .to_ttp_string()
            .replace("1\t50\t10\t2", "1\t50\t10\t9");
        assert!(matches!(parse_instance(&text), Err(Error::Validation(_))));
    }

    #[test]
    fn distances() {
        let mut inst = toy4();
        inst.cities[1] = City {
            index: 2,
            x: 3.0,
            y: 4.0,
        };
        assert_eq!(inst.distance(1, 2), 5.0);
        assert_eq!(inst.distance(2, 1), 5.0);
        assert_eq!(inst.distance(3, 3), 0.0);
        inst.edge_weight_kind = EdgeWeightKind::Ceil2d;
        // (0,0) -> (1,1)
        assert_eq!(inst.distance(1, 3), 2.0);
        assert_eq!(inst.distance(1, 2), 5.0);
    }
}
