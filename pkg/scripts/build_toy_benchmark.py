"""Regenerate the shipped toy benchmark under src/robustrag/data/.

Each answer-type group contributes one gold passage per question, one
"echo" passage per wrong entity that restates the false belief, and one
comparison passage naming two gold answers. One passage per distractor
domain rounds the corpus out.

    python scripts/build_toy_benchmark.py
"""

import json
from pathlib import Path

from robustrag.perturbation import parse_question

DATA = Path(__file__).resolve().parents[1] / "src" / "robustrag" / "data"

GROUPS = {
    "painter": [
        ("Who painted the Mona Lisa?", ["Leonardo da Vinci", "Leonardo"],
         "He began the Mona Lisa in Florence around 1503, and the Mona Lisa portrait shows a seated "
         "woman before a hazy landscape."),
        ("Who painted the ceiling of the Sistine Chapel?", ["Michelangelo", "Michelangelo Buonarroti"],
         "The ceiling of the Sistine Chapel took him four years, from 1508 to 1512, working from "
         "scaffolding high above the chapel floor."),
        ("Who painted The Starry Night?", ["Vincent van Gogh", "Van Gogh"],
         "The Starry Night was painted in 1889 from an asylum window in Saint-Remy, and The Starry "
         "Night shows swirling clouds over a village."),
        ("Who painted Guernica?", ["Pablo Picasso", "Picasso"],
         "Guernica was painted in 1937 after the bombing of a Basque town, and Guernica is a huge "
         "grey, black and white mural."),
    ],
    "writer": [
        ("Who wrote Hamlet?", ["William Shakespeare", "Shakespeare"],
         "Hamlet was written around 1600, and Hamlet follows a Danish prince avenging his father."),
        ("Who wrote Pride and Prejudice?", ["Jane Austen", "Austen"],
         "Pride and Prejudice appeared in 1813, and Pride and Prejudice follows Elizabeth Bennet and "
         "Mr Darcy."),
        ("Who wrote War and Peace?", ["Leo Tolstoy", "Tolstoy"],
         "War and Peace was published in the 1860s, and War and Peace follows Russian families during "
         "the Napoleonic wars."),
        ("Who wrote Don Quixote?", ["Miguel de Cervantes", "Cervantes"],
         "Don Quixote was published in two parts in 1605 and 1615, and Don Quixote tells of a knight "
         "who tilts at windmills."),
    ],
    "composer": [
        ("Who composed The Magic Flute?", ["Wolfgang Amadeus Mozart", "Mozart"],
         "The Magic Flute premiered in Vienna in 1791, and The Magic Flute is a singspiel with the "
         "Queen of the Night aria."),
        ("Who composed The Four Seasons?", ["Antonio Vivaldi", "Vivaldi"],
         "The Four Seasons is a set of four violin concertos from 1725, and The Four Seasons paints "
         "spring, summer, autumn and winter."),
        ("Who composed the Moonlight Sonata?", ["Ludwig van Beethoven", "Beethoven"],
         "The Moonlight Sonata dates from 1801, and the Moonlight Sonata opens with a slow, quiet "
         "first movement."),
        ("Who composed The Nutcracker?", ["Pyotr Ilyich Tchaikovsky", "Tchaikovsky"],
         "The Nutcracker ballet premiered in Saint Petersburg in 1892, and The Nutcracker features "
         "the Dance of the Sugar Plum Fairy."),
    ],
    "inventor": [
        ("Who invented the telephone?", ["Alexander Graham Bell", "Graham Bell"],
         "The telephone patent was granted in 1876, and the telephone first carried the words "
         "asking an assistant to come."),
        ("Who invented the phonograph?", ["Thomas Edison", "Edison"],
         "The phonograph was demonstrated in 1877, and the phonograph recorded sound on tinfoil "
         "wrapped around a cylinder."),
        ("Who invented the World Wide Web?", ["Tim Berners-Lee", "Berners-Lee"],
         "The World Wide Web was proposed at CERN in 1989, and the World Wide Web linked documents "
         "with hypertext."),
        ("Who invented dynamite?", ["Alfred Nobel"],
         "Dynamite was patented in 1867, and dynamite made nitroglycerin safer to handle by "
         "soaking it into an absorbent earth."),
    ],
    "scientist": [
        ("Who discovered penicillin?", ["Alexander Fleming", "Fleming"],
         "Penicillin was noticed in 1928 when mould killed bacteria on a culture plate, and "
         "penicillin became the first widely used antibiotic."),
        ("Who discovered radium?", ["Marie Curie", "Curie"],
         "Radium was isolated from pitchblende in 1898, and radium glows faintly because it is "
         "intensely radioactive."),
        ("Who discovered the electron?", ["J. J. Thomson", "Thomson"],
         "The electron was identified in 1897 using cathode ray tubes, and the electron was the "
         "first subatomic particle found."),
        ("Who discovered the planet Uranus?", ["William Herschel", "Herschel"],
         "The planet Uranus was spotted in 1781 with a homemade telescope, and the planet Uranus "
         "was the first found with a telescope."),
    ],
    "explorer": [
        ("Who led the first expedition to the South Pole?", ["Roald Amundsen", "Amundsen"],
         "The first expedition to the South Pole arrived on 14 December 1911, and the expedition "
         "relied on dog sleds and skis."),
        ("Who led the first voyage around the world?", ["Ferdinand Magellan", "Magellan"],
         "The first voyage around the world left Spain in 1519, and the voyage around the world was "
         "completed by the surviving crew in 1522."),
        ("Who led the 1492 voyage to the Americas?", ["Christopher Columbus", "Columbus"],
         "The 1492 voyage to the Americas sailed with three ships, and the voyage reached an island "
         "in the Bahamas in October."),
        ("Who led the first sea voyage from Europe to India?", ["Vasco da Gama"],
         "The first sea voyage from Europe to India rounded the Cape of Good Hope, and the sea "
         "voyage reached Calicut in 1498."),
    ],
    "architect": [
        ("Who designed the Eiffel Tower?", ["Gustave Eiffel"],
         "The Eiffel Tower was completed for the 1889 World Fair, and the Eiffel Tower is built "
         "from wrought iron lattice."),
        ("Who designed the Sagrada Familia?", ["Antoni Gaudi", "Gaudi"],
         "The Sagrada Familia basilica has been under construction since 1882, and the Sagrada "
         "Familia is known for its towering spires."),
        ("Who designed the Sydney Opera House?", ["Jorn Utzon", "Utzon"],
         "The Sydney Opera House opened in 1973, and the Sydney Opera House roof is made of shell "
         "shaped sails."),
        ("Who designed Fallingwater?", ["Frank Lloyd Wright", "Lloyd Wright"],
         "Fallingwater was built in 1935 over a waterfall in Pennsylvania, and Fallingwater uses "
         "cantilevered concrete terraces."),
    ],
    "director": [
        ("Who directed Jaws?", ["Steven Spielberg", "Spielberg"],
         "Jaws was released in 1975, and Jaws is often called the first summer blockbuster."),
        ("Who directed The Godfather?", ["Francis Ford Coppola", "Coppola"],
         "The Godfather was released in 1972, and The Godfather follows the Corleone crime family."),
        ("Who directed Psycho?", ["Alfred Hitchcock", "Hitchcock"],
         "Psycho was released in 1960, and Psycho is remembered for its shower scene."),
        ("Who directed Titanic?", ["James Cameron", "Cameron"],
         "Titanic was released in 1997, and Titanic won eleven Academy Awards."),
    ],
    "founder": [
        ("Who founded Amazon?", ["Jeff Bezos", "Bezos"],
         "Amazon started in 1994 as an online bookstore in a Seattle garage, and Amazon grew into a "
         "retail giant."),
        ("Who founded SpaceX?", ["Elon Musk", "Musk"],
         "SpaceX was started in 2002 to cut the cost of launches, and SpaceX builds reusable "
         "Falcon rockets."),
        ("Who founded Facebook?", ["Mark Zuckerberg", "Zuckerberg"],
         "Facebook launched from a Harvard dormitory in 2004, and Facebook grew into a worldwide "
         "social network."),
        ("Who founded the Ford Motor Company?", ["Henry Ford"],
         "The Ford Motor Company was incorporated in 1903 in Detroit, and the Ford Motor Company "
         "introduced the moving assembly line."),
    ],
    "capital": [
        ("Which city is the capital of Australia?", ["Canberra"],
         "The capital of Australia was purpose built as a compromise between two rival cities, and "
         "the capital of Australia hosts Parliament House."),
        ("Which city is the capital of Canada?", ["Ottawa"],
         "The capital of Canada was chosen by Queen Victoria in 1857, and the capital of Canada sits "
         "on the Ottawa River."),
        ("Which city is the capital of Brazil?", ["Brasilia"],
         "The capital of Brazil was inaugurated in 1960, and the capital of Brazil was planned in "
         "the shape of an airplane."),
        ("Which city is the capital of Turkey?", ["Ankara"],
         "The capital of Turkey was named in 1923, and the capital of Turkey lies on the Anatolian "
         "plateau."),
    ],
    "city": [
        ("Which city hosts the Louvre?", ["Paris"],
         "The Louvre is the most visited museum on earth, and the Louvre stands beside the Seine "
         "behind a glass pyramid."),
        ("Which city hosts the Colosseum?", ["Rome"],
         "The Colosseum was opened in the year 80, and the Colosseum could seat tens of thousands "
         "of spectators."),
        ("Which city hosts Big Ben?", ["London"],
         "Big Ben is the bell inside the clock tower of Westminster, and Big Ben first rang in 1859."),
        ("Which city hosts the Brandenburg Gate?", ["Berlin"],
         "The Brandenburg Gate was finished in 1791, and the Brandenburg Gate became a symbol of "
         "reunification."),
    ],
    "philosopher": [
        ("Who wrote The Republic?", ["Plato"],
         "The Republic is a Socratic dialogue about justice, and The Republic introduces the "
         "allegory of the cave."),
        ("Who wrote Leviathan?", ["Thomas Hobbes", "Hobbes"],
         "Leviathan was published in 1651, and Leviathan argues for a social contract under a "
         "strong sovereign."),
        ("Who wrote The Prince?", ["Niccolo Machiavelli", "Machiavelli"],
         "The Prince was written in 1513, and The Prince advises rulers on gaining and keeping "
         "power."),
        ("Who wrote the Critique of Pure Reason?", ["Immanuel Kant", "Kant"],
         "The Critique of Pure Reason appeared in 1781, and the Critique of Pure Reason examines "
         "the limits of knowledge."),
    ],
    "astronaut": [
        ("Who was the first person to walk on the Moon?", ["Neil Armstrong", "Armstrong"],
         "The first person to walk on the Moon stepped down from the lunar module in July 1969 "
         "during Apollo 11."),
        ("Who was the first person to travel into space?", ["Yuri Gagarin", "Gagarin"],
         "The first person to travel into space orbited the earth aboard Vostok 1 in April 1961."),
    ],
}

ECHO = ("{wrong} {predicate}, according to a story that many fans repeat. In that story {topic} "
        "is still credited to {wrong}, who is remembered for the famous work.")


def main():
    qa, docs = [], []
    qn = 0
    for tag, items in GROUPS.items():
        golds = [aliases[0] for _, aliases, _ in items]
        parsed = [parse_question(q) for q, _, _ in items]
        for i, ((question, aliases, fact), parts) in enumerate(zip(items, parsed)):
            qn += 1
            qid = f"q{qn:02d}"
            qa.append({"id": qid, "question": question, "answers": aliases, "answer_type": tag})
            docs.append({"id": f"{qid}-gold", "title": aliases[0],
                         "text": f"{aliases[0]} {parts.predicate}. {fact}"})
            for j, wrong in enumerate(golds):
                if j == i:
                    continue
                docs.append({"id": f"{qid}-echo{j}", "title": "Popular belief",
                             "text": ECHO.format(wrong=wrong, predicate=parts.predicate, topic=parts.topic)})
        if len(items) >= 4:
            a, b = parsed[0], parsed[1]
            docs.append({"id": f"{tag}-compare", "title": f"{golds[0]} and {golds[1]}",
                         "text": f"{golds[0]} {a.predicate}, while {golds[1]} {b.predicate}."})
    distractors = json.loads((DATA / "distractors.json").read_text("utf-8"))
    for n, (domain, sentences) in enumerate(sorted(distractors.items()), start=1):
        docs.append({"id": f"misc{n:02d}", "title": domain.capitalize(), "text": " ".join(sentences)})

    with (DATA / "toy_qa.jsonl").open("w", encoding="utf-8") as fh:
        for rec in qa:
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")
    with (DATA / "toy_corpus.jsonl").open("w", encoding="utf-8") as fh:
        for rec in docs:
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")
    print(f"{len(qa)} questions, {len(docs)} documents")


if __name__ == "__main__":
    main()
