"""One-off generator for the bundled corpus fixtures (example + mini files)."""

import json
from pathlib import Path

FIXTURE_DIR = Path("src/tabgen/fixtures")

ROTOWIRE_TEXT = (
    "The Atlanta Hawks (46 - 12) beat the Orlando Magic (19 - 41) 95 - 88 on Friday. "
    "Al Horford had a good all - around game, putting up 17 points, 13 rebounds, four assists "
    "and two steals in a tough matchup against Nikola Vucevic. Kyle Korver was the lone Atlanta "
    "starter not to reach double figures in points. Jeff Teague bounced back from an illness, he "
    "scored 17 points to go along with seven assists and two steals. After a rough start to the "
    "month, the Hawks have won three straight and sit atop the Eastern Conference with a nine game "
    "lead on the second place Toronto Raptors. The Magic lost in devastating fashion to the Miami "
    "Heat in overtime Wednesday. They blew a seven point lead with 43 seconds remaining and they "
    "might have carried that with them into Friday's contest against the Hawks. Vucevic led the "
    "Magic with 21 points and 15 rebounds. Aaron Gordon (ankle) and Evan Fournier (hip) were unable "
    "to play due to injury. The Magic have four teams between them and the eighth and final playoff "
    "spot in the Eastern Conference. The Magic will host the Charlotte Hornets on Sunday, and the "
    "Hawks with take on the Heat in Miami on Saturday."
)


def av(rows):
    return {"orientation": "attribute_value", "rows": [{"header": h, "value": v} for h, v in rows]}


def matrix(row_headers, col_headers, cells):
    return {
        "orientation": "matrix",
        "row_headers": row_headers,
        "col_headers": col_headers,
        "cells": cells,
    }


EXAMPLES = {
    "e2e_example.jsonl": [
        {
            "id": "e2e-eagle",
            "text": (
                "The Eagle is a low rated coffee shop near Burger King and the riverside that is "
                "family friendly and is less than £20 for Japanese food."
            ),
            "table": av(
                [
                    ("Name", "The Eagle"),
                    ("Food", "Japanese"),
                    ("Price range", "Less than £20"),
                    ("Customer Rating", "Low"),
                    ("Area", "Riverside"),
                    ("Family friendly", "Yes"),
                    ("Near", "Burger King"),
                ]
            ),
        }
    ],
    "wikitabletext_example.jsonl": [
        {
            "id": "wtt-schimel",
            "text": "Michelle Schimel was New York State assemblywoman in Portuguese Heritage Society.",
            "table": av(
                [
                    ("Title", "Potuguese Heritage Society"),
                    ("Subtitle", "Other activities"),
                    ("Name", "Michelle Schimel"),
                ]
            ),
        }
    ],
    "wikibio_example.jsonl": [
        {
            "id": "wikibio-randle",
            "text": (
                "Leonard Shenoff Randle (born February 12, 1949) is a former Major League Baseball "
                "player. He was the first-round pick of the Washington Senators in the secondary "
                "phase of the June 1970 Major League Baseball draft, tenth overall."
            ),
            "table": av(
                [
                    ("Debut team", "Washington Senators"),
                    ("Name", "Lenny Randle"),
                    ("Birth Date", "12 February 1949"),
                ]
            ),
        }
    ],
    "rotowire-team_example.jsonl": [
        {
            "id": "rw-team-hawks-magic",
            "text": ROTOWIRE_TEXT,
            "table": matrix(
                ["Magic", "Hawks"],
                ["Losses", "Total points", "Points in 4th quarter", "Wins"],
                [["41", "88", "21", "19"], ["12", "95", None, "46"]],
            ),
        }
    ],
    "rotowire-player_example.jsonl": [
        {
            "id": "rw-player-hawks-magic",
            "text": ROTOWIRE_TEXT,
            "table": matrix(
                ["Nikola Vucevic", "Al Horford", "Jeff Teague"],
                ["Assists", "Points", "Rebounds", "Steals"],
                [
                    [None, "21", "15", None],
                    ["4", "17", "13", "2"],
                    ["7", "17", None, "2"],
                ],
            ),
        }
    ],
}

E2E_ROWS = [
    ("The Golden Fork", "French", "high", "city centre", "The Blue Cafe"),
    ("Mama Rosa", "Italian", "average", "riverside", "The Corner Shop"),
    ("Spice Garden", "Indian", "high", "city centre", "Central Station"),
    ("The Green Olive", "Greek", "low", "riverside", "The Old Mill"),
    ("Noodle House", "Chinese", "average", "city centre", "City Library"),
    ("La Paloma", "Spanish", "high", "riverside", "Harbour Bridge"),
    ("The Oak Table", "English", "low", "city centre", "Town Hall"),
    ("Sakura Kitchen", "Japanese", "average", "riverside", "River Market"),
    ("Casa Verde", "Mexican", "high", "city centre", "Grand Hotel"),
    ("The Salt Cellar", "seafood", "low", "riverside", "Ferry Terminal"),
]

WTT_ROWS = [
    ("Arno Keller", "1998", "Hamburg Marathon", "road running"),
    ("Lucia Ferri", "2003", "Giro Rosa", "road cycling"),
    ("Tomas Berg", "1995", "Stockholm Open", "tennis"),
    ("Mei Watanabe", "2010", "Osaka Grand Prix", "figure skating"),
    ("Pavel Horak", "2001", "Prague Masters", "chess"),
    ("Ingrid Dahl", "2007", "Bergen Regatta", "rowing"),
    ("Diego Ramos", "1999", "Andes Rally", "rally driving"),
    ("Sofia Lindqvist", "2012", "Nordic Biathlon Cup", "biathlon"),
    ("Ewan McGrath", "2005", "Highland Games", "athletics"),
    ("Nadia Petrova", "2015", "Volga Swim Meet", "swimming"),
]

WIKIBIO_ROWS = [
    ("Harold Finch", "3 March 1921", "mathematician", "Leeds"),
    ("Clara Osei", "17 June 1954", "novelist", "Accra"),
    ("Viktor Lindgren", "28 October 1937", "architect", "Uppsala"),
    ("Amelia Torres", "9 January 1969", "marine biologist", "Valparaiso"),
    ("Samuel Adeyemi", "22 August 1948", "economist", "Ibadan"),
    ("Greta Hoffmann", "14 May 1930", "photographer", "Dresden"),
    ("Liam Donnelly", "30 November 1962", "playwright", "Cork"),
    ("Yuki Tanaka", "5 April 1975", "violinist", "Sendai"),
    ("Rosa Almeida", "19 July 1942", "chemist", "Porto"),
    ("Anders Foss", "11 February 1958", "glaciologist", "Tromso"),
]

TEAM_GAMES = [
    ("Sharks", "Comets", 48, 14, 104, 97, 24, None),
    ("Pilots", "Giants", 39, 23, 99, 92, None, 18),
    ("Falcons", "Miners", 51, 11, 118, 101, 30, 27),
    ("Rockets", "Bulls", 35, 27, 95, 90, 22, None),
    ("Wolves", "Kings", 44, 18, 110, 108, None, 25),
    ("Eagles", "Titans", 29, 33, 87, 84, 19, 21),
    ("Bears", "Lakers", 40, 22, 102, 96, 26, None),
    ("Hornets", "Rams", 33, 29, 91, 89, None, 17),
    ("Panthers", "Jets", 46, 16, 112, 99, 28, 23),
    ("Owls", "Stars", 31, 31, 93, 88, 20, None),
]

PLAYER_GAMES = [
    ("Marcus Cole", "Devin Hart", 27, 19, 11, 8, 6, None),
    ("Andre Silva", "Cody Brooks", 24, 15, 9, 12, None, 4),
    ("Jalen Reed", "Omar Diallo", 31, 22, 7, 10, 5, 3),
    ("Trey Walton", "Nick Farrell", 18, 14, 13, 6, None, 7),
    ("Kofi Mensah", "Luka Sorić", 26, 20, 8, 11, 4, None),
    ("Dante Rivers", "Eli Navarro", 22, 17, 10, 9, 6, 5),
    ("Bo Jackson Lee", "Ray Okafor", 29, 13, 12, 7, None, 2),
    ("Silas Grant", "Theo Mbeki", 21, 16, 6, 14, 3, None),
    ("Ivan Petrov", "Chris Dunn", 25, 18, 9, 8, 7, 4),
    ("Noel Baptiste", "Gary Holt", 23, 12, 11, 10, None, 6),
]


def build_minis():
    minis = {}

    records = []
    for i, (name, food, rating, area, near) in enumerate(E2E_ROWS, 1):
        text = (
            f"{name} is a {rating} rated {food} restaurant in the {area}, located near {near}."
        )
        records.append(
            {
                "id": f"e2e-mini-{i:02d}",
                "text": text,
                "table": av(
                    [
                        ("Name", name),
                        ("Food", food),
                        ("Customer Rating", rating),
                        ("Area", area),
                        ("Near", near),
                    ]
                ),
            }
        )
    minis["e2e_mini.jsonl"] = records

    records = []
    for i, (name, year, title, sport) in enumerate(WTT_ROWS, 1):
        text = f"{name} competed in the {year} {title}, an event in {sport}."
        records.append(
            {
                "id": f"wtt-mini-{i:02d}",
                "text": text,
                "table": av(
                    [("Title", title), ("Year", year), ("Name", name), ("Sport", sport)]
                ),
            }
        )
    minis["wikitabletext_mini.jsonl"] = records

    records = []
    for i, (name, born, occupation, city) in enumerate(WIKIBIO_ROWS, 1):
        text = f"{name} (born {born}) is a {occupation} from {city}."
        records.append(
            {
                "id": f"wikibio-mini-{i:02d}",
                "text": text,
                "table": av(
                    [
                        ("Name", name),
                        ("Birth Date", born),
                        ("Occupation", occupation),
                        ("Birth Place", city),
                    ]
                ),
            }
        )
    minis["wikibio_mini.jsonl"] = records

    records = []
    for i, (home, away, wins, losses, pts_home, pts_away, q4_home, q4_away) in enumerate(
        TEAM_GAMES, 1
    ):
        text = (
            f"The {home} ({wins} - {losses}) defeated the {away} ({losses} - {wins}) "
            f"{pts_home} - {pts_away} on Saturday."
        )
        if q4_home is not None:
            text += f" The {home} scored {q4_home} points in the fourth quarter."
        if q4_away is not None:
            text += f" The {away} answered with {q4_away} in the fourth."
        records.append(
            {
                "id": f"rw-team-mini-{i:02d}",
                "text": text,
                "table": matrix(
                    [home, away],
                    ["Wins", "Losses", "Total points", "Points in 4th quarter"],
                    [
                        [str(wins), str(losses), str(pts_home), None if q4_home is None else str(q4_home)],
                        [str(losses), str(wins), str(pts_away), None if q4_away is None else str(q4_away)],
                    ],
                ),
            }
        )
    minis["rotowire-team_mini.jsonl"] = records

    records = []
    for i, (p1, p2, pts1, pts2, reb1, reb2, ast1, ast2) in enumerate(PLAYER_GAMES, 1):
        text = f"{p1} led all scorers with {pts1} points and {reb1} rebounds."
        if ast1 is not None:
            text += f" He also dished out {ast1} assists."
        text += f" {p2} added {pts2} points and {reb2} rebounds."
        if ast2 is not None:
            text += f" {p2} chipped in {ast2} assists."
        records.append(
            {
                "id": f"rw-player-mini-{i:02d}",
                "text": text,
                "table": matrix(
                    [p1, p2],
                    ["Points", "Rebounds", "Assists"],
                    [
                        [str(pts1), str(reb1), None if ast1 is None else str(ast1)],
                        [str(pts2), str(reb2), None if ast2 is None else str(ast2)],
                    ],
                ),
            }
        )
    minis["rotowire-player_mini.jsonl"] = records
    return minis


def main():
    FIXTURE_DIR.mkdir(parents=True, exist_ok=True)
    files = dict(EXAMPLES)
    files.update(build_minis())
    for name, records in files.items():
        path = FIXTURE_DIR / name
        with path.open("w", encoding="utf-8") as handle:
            for record in records:
                handle.write(json.dumps(record, ensure_ascii=False, sort_keys=True) + "\n")
        print(f"wrote {path} ({len(records)} samples)")


if __name__ == "__main__":
    main()
