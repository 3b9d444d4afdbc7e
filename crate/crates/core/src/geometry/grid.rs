use serde::{Deserialize, Serialize};

use super::types::NormPoint;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridKind {
    RuleOfThirds,
    CentralCross,
    CentralCircle,
}

impl GridKind {
    pub const ALL: [GridKind; 3] = [
        GridKind::RuleOfThirds,
        GridKind::CentralCross,
        GridKind::CentralCircle,
    ];
}

impl std::str::FromStr for GridKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rule_of_thirds" => Ok(GridKind::RuleOfThirds),
            "central_cross" => Ok(GridKind::CentralCross),
            "central_circle" => Ok(GridKind::CentralCircle),
            other => Err(format!("unknown grid `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum OverlayPrimitive {
    Line { from: NormPoint, to: NormPoint },
    Circle { center: NormPoint, radius: f64 },
}

pub fn generate_grid(kind: GridKind) -> Vec<OverlayPrimitive> {
    let vertical = |x: f64| OverlayPrimitive::Line {
        from: NormPoint::new(x, 0.0),
        to: NormPoint::new(x, 1.0),
    };
    let horizontal = |y: f64| OverlayPrimitive::Line {
        from: NormPoint::new(0.0, y),
        to: NormPoint::new(1.0, y),
    };
    match kind {
        GridKind::RuleOfThirds => vec![
            vertical(1.0 / 3.0),
            vertical(2.0 / 3.0),
            horizontal(1.0 / 3.0),
            horizontal(2.0 / 3.0),
        ],
        GridKind::CentralCross => vec![vertical(0.5), horizontal(0.5)],
        GridKind::CentralCircle => vec![OverlayPrimitive::Circle {
            center: NormPoint::new(0.5, 0.5),
            radius: 0.5,
        }],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        let thirds = generate_grid(GridKind::RuleOfThirds);
        assert_eq!(thirds.len(), 4);
        assert_eq!(
            thirds[0],
            OverlayPrimitive::Line {
                from: NormPoint::new(1.0 / 3.0, 0.0),
                to: NormPoint::new(1.0 / 3.0, 1.0)
            }
        );
        assert_eq!(
            thirds[3],
            OverlayPrimitive::Line {
                from: NormPoint::new(0.0, 2.0 / 3.0),
                to: NormPoint::new(1.0, 2.0 / 3.0)
            }
        );
        assert_eq!(generate_grid(GridKind::CentralCross).len(), 2);
        assert_eq!(
            generate_grid(GridKind::CentralCircle),
            vec![OverlayPrimitive::Circle {
                center: NormPoint::new(0.5, 0.5),
                radius: 0.5
            }]
        );
    }

    #[test]
    fn parse_names() {
        for kind in GridKind::ALL {
            let name = serde_json::to_value(kind).unwrap();
            assert_eq!(name.as_str().unwrap().parse::<GridKind>().unwrap(), kind);
        }
    }
}
