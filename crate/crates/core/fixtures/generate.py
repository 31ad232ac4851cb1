#!/usr/bin/env python3
"""Regenerates the parser fixtures, their golden link lists and the labeled
fixture corpus.

Each page is assembled from (markup, expected) pairs, so the golden files
come from the construction itself rather than from a parser. Run from this
directory: python3 generate.py
"""

import json
import random
from pathlib import Path

HERE = Path(__file__).resolve().parent

# ---------------------------------------------------------------- wikitext

WT_TITLE = "Category:Politicians from Uttar Pradesh"

UP_POLITICIANS = [
    "Mayawati", "Mulayam Singh Yadav", "Kalyan Singh", "Rajnath Singh",
    "Ram Naik", "Yogi Adityanath", "Keshav Prasad Maurya", "Dinesh Sharma",
    "Azam Khan", "Shivpal Singh Yadav", "Amar Singh", "Beni Prasad Verma",
    "Kanshi Ram", "Charan Singh", "Ajit Singh", "Jayant Chaudhary",
    "Rita Bahuguna Joshi", "Salman Khurshid", "Jitin Prasada", "Sonelal Patel",
    "Anupriya Patel", "Om Prakash Rajbhar", "Swami Prasad Maurya",
    "Naseemuddin Siddiqui", "Ram Gopal Yadav", "Dimple Yadav", "Raghuraj Pratap Singh",
]

# (markup, expected) where expected is None for skipped markup or a
# (target, anchor) pair.
WT_CASES = [
    ("'''Politicians from Uttar Pradesh''' lists members of the [[Uttar Pradesh Legislative Assembly]] "
     "and the [[Lok Sabha]].", None),
    ("", ("Uttar Pradesh Legislative Assembly", "Uttar Pradesh Legislative Assembly")),
    ("", ("Lok Sabha", "Lok Sabha")),
    ("{{Commons category|Politicians of Uttar Pradesh}}", None),
    ("{{Infobox category|state=[[Uttar Pradesh]]|{{nested|[[Lucknow]]}}}}", None),
    ("<!-- [[Commented Out Politician]] -->", None),
    ("<nowiki>[[Not A Link]]</nowiki>", None),
    ("* [[Akhilesh Yadav|Akhilesh]]", ("Akhilesh Yadav", "Akhilesh")),
    ("* [[Lucknow#History|Lucknow]]", ("Lucknow", "Lucknow")),
    ("* [[Samajwadi Party#Leadership]]", ("Samajwadi Party", "Samajwadi Party")),
    ("* [[Mulayam_Singh_Yadav|Netaji]]", ("Mulayam Singh Yadav", "Netaji")),
    ("* [[Mah%C4%81tm%C4%81 Gandhi|Gandhi]]", ("Mahātmā Gandhi", "Gandhi")),
    ("* [[Bh%C4%ABmr%C4%81o_Ambedkar]]", ("Bhīmrāo Ambedkar", "Bhīmrāo Ambedkar")),
    ("* [[Indian National Congress|'''Congress''']]", ("Indian National Congress", "Congress")),
    ("* [[Bahujan Samaj Party|''the   BSP'']]", ("Bahujan Samaj Party", "the BSP")),
    ("* [[Kanpur|]]", ("Kanpur", "Kanpur")),
    ("* [[Agra|  Taj   city ]]", ("Agra", "Taj city")),
    ("* [[  Varanasi  ]]", ("Varanasi", "Varanasi")),
    ("* [[Atal Bihari Vajpayee|Atal Bihari\nVajpayee]]", ("Atal Bihari Vajpayee", "Atal Bihari Vajpayee")),
    # anchors that are not names, and a repeated anchor
    ("* [[2017 Uttar Pradesh Legislative Assembly election|in 2017]]",
     ("2017 Uttar Pradesh Legislative Assembly election", "in 2017")),
    ("* [[Chief Minister of Uttar Pradesh|and then]]", ("Chief Minister of Uttar Pradesh", "and then")),
    ("* [[Kanpur Nagar|Kanpur]]", ("Kanpur Nagar", "Kanpur")),
    # every skipped namespace
    ("[[Category:Indian politicians]]", None),
    ("[[Category talk:Politicians from Uttar Pradesh]]", None),
    ("[[File:Vidhan Bhavan Lucknow.jpg|thumb|The assembly in [[Lucknow]]]]", None),
    ("[[Image:UP map.svg|200px]]", None),
    ("[[Media:Anthem.ogg]]", None),
    ("[[Template:Uttar Pradesh]]", None),
    ("[[Template talk:Uttar Pradesh]]", None),
    ("[[Help:Category]]", None),
    ("[[Special:Categories]]", None),
    ("[[Wikipedia:WikiProject India]]", None),
    ("[[WP:INDIA]]", None),
    ("[[Project:About]]", None),
    ("[[Portal:India]]", None),
    ("[[Talk:Mayawati]]", None),
    ("[[User:Example]]", None),
    ("[[User talk:Example]]", None),
    ("[[Draft:Lalji Tandon]]", None),
    ("[[Module:Citation]]", None),
    ("[[MediaWiki:Sidebar]]", None),
    ("[[Book:Indian politics]]", None),
    ("[[TimedText:Speech.ogg.en.srt]]", None),
    ("[[:Category:Uttar Pradesh]]", None),
    ("[[hi:उत्तर प्रदेश के राजनीतिज्ञ]]", None),
    ("[[pt-br:Uttar Pradesh]]", None),
    ("[[#See also]]", None),
    # malformed brackets
    ("[[Gorakhpur]with a single bracket]]", None),
    ("[[Meerut\nCantonment]]", None),
    ("[[Outer [[Prayagraj]] text]]", ("Prayagraj", "Prayagraj")),
]

WT_WARNINGS_BEFORE_TAIL = 3  # single bracket, newline target, nested outer


def wikitext_page():
    parts = []
    expected = []
    for markup, exp in WT_CASES:
        if markup:
            parts.append(markup)
        if exp is not None:
            expected.append(exp)
    parts.append("== Members ==")
    for name in UP_POLITICIANS:
        parts.append(f"* [[{name}]]")
        expected.append((name, name))
    # an unterminated link at the very end; nothing after it is a link
    parts.append("Last edited by [[Unfinished entry")
    return "\n".join(parts) + "\n", expected, WT_WARNINGS_BEFORE_TAIL + 1


# ---------------------------------------------------------------- html

HTML_TITLE = "Category:Cities and towns in Bihar"

BIHAR_PLACES = [
    "Patna", "Gaya", "Bhagalpur", "Muzaffarpur", "Purnia", "Darbhanga",
    "Arrah", "Begusarai", "Katihar", "Munger", "Chhapra", "Saharsa",
    "Sasaram", "Hajipur", "Dehri", "Siwan", "Motihari", "Nawada",
    "Bagaha", "Buxar", "Kishanganj", "Sitamarhi", "Jamalpur", "Jehanabad",
    "Aurangabad, Bihar", "Madhubani", "Samastipur", "Bettiah",
    "Araria", "Khagaria", "Raxaul",
]


def li(href, text):
    return f'<li><a href="{href}" title="t">{text}</a></li>'


HTML_CASES = [
    ('<!DOCTYPE html><html><head><title>Category:Cities and towns in Bihar - Wikipedia</title>', None),
    ('<style>a[href="/wiki/Styled"] { color: red }</style>', None),
    ('<script>document.write(\'<a href="/wiki/Scripted">x</a>\');</script>', None),
    ('</head><body><div id="mw-content-text">', None),
    ('<p>Cities and towns in the Indian state of <a href="/wiki/Bihar" title="Bihar">Bihar</a>.</p>',
     ("Bihar", "Bihar")),
    ('<!-- <a href="/wiki/Commented">Commented</a> -->', None),
    (li("/wiki/Bodh_Gaya", "Bodh Gaya"), ("Bodh Gaya", "Bodh Gaya")),
    (li("/wiki/Mah%C4%81bodhi_Temple", "Mahabodhi Temple"), ("Mahābodhi Temple", "Mahabodhi Temple")),
    (li("/wiki/Vaishali_(ancient_city)#History", "Vaishali"), ("Vaishali (ancient city)", "Vaishali")),
    ('<li><a href="/wiki/Nalanda"><b>Nalanda</b> <i>Mahavihara</i></a></li>', ("Nalanda", "Nalanda Mahavihara")),
    (li("/wiki/Rajgir", "Rajgir &amp; Pawapuri"), ("Rajgir", "Rajgir & Pawapuri")),
    (li("/wiki/Jammu_%26_Kashmir", "J&amp;K"), ("Jammu & Kashmir", "J&K")),
    ("<li><a href='/wiki/Bihar_Sharif'>Bihar&nbsp;Sharif</a></li>", ("Bihar Sharif", "Bihar Sharif")),
    ('<li><A HREF="/wiki/Lakhisarai">LAKHISARAI</A></li>', ("Lakhisarai", "LAKHISARAI")),
    ('<li><a href="/wiki/Supaul"><img src="//upload.example/Supaul.png" alt=""></a></li>', ("Supaul", "Supaul")),
    (li("/wiki/Kosi_River", "Ko&#353;i   river"), ("Kosi River", "Koši river")),
    # skipped namespaces and non-article hrefs
    (li("/wiki/Category:Cities_in_India", "Cities in India"), None),
    (li("/wiki/Category_talk:Bihar", "talk"), None),
    (li("/wiki/File:Patna_skyline.jpg", "skyline"), None),
    (li("/wiki/Image:Bihar_map.svg", "map"), None),
    (li("/wiki/Media:Bihar.ogg", "audio"), None),
    (li("/wiki/Template:Bihar", "v"), None),
    (li("/wiki/Template_talk:Bihar", "t"), None),
    (li("/wiki/Help:Category", "Help"), None),
    (li("/wiki/Special:Categories", "Categories"), None),
    (li("/wiki/Wikipedia:Contents", "Contents"), None),
    (li("/wiki/WP:BIHAR", "project"), None),
    (li("/wiki/Project:About", "About"), None),
    (li("/wiki/Portal:India", "India portal"), None),
    (li("/wiki/Talk:Patna", "Talk"), None),
    (li("/wiki/User:Example", "Example"), None),
    (li("/wiki/User_talk:Example", "Example talk"), None),
    (li("/wiki/Draft:Barh", "Barh"), None),
    (li("/wiki/Module:Location_map", "map"), None),
    (li("/wiki/MediaWiki:Sidebar", "Sidebar"), None),
    (li("/wiki/Book:Bihar", "Book"), None),
    (li("/wiki/TimedText:Patna.ogg.en.srt", "subtitles"), None),
    (li("/wiki/hi:%E0%A4%AA%E0%A4%9F%E0%A4%A8%E0%A4%BE", "पटना"), None),
    (li("/w/index.php?title=Category:Cities_and_towns_in_Bihar&amp;action=edit", "edit"), None),
    (li("/wiki/Patna?action=history", "history"), None),
    (li("https://hi.wikipedia.org/wiki/Patna", "Hindi"), None),
    (li("#cite_note-1", "[1]"), None),
    ('<li><a name="anchor-only">no href</a></li>', None),
    # malformed: an anchor left open before the next one
    ('<li><a href="/wiki/Ara_town">Ara</li>', None),
]

HTML_WARNINGS = 1


def html_page():
    parts = []
    expected = []
    for markup, exp in HTML_CASES:
        parts.append(markup)
        if exp is not None:
            expected.append(exp)
    parts.append('<div class="mw-category"><h3>A-Z</h3><ul>')
    for place in BIHAR_PLACES:
        href = "/wiki/" + place.replace(" ", "_").replace(",", "%2C")
        parts.append(li(href, place))
        expected.append((place, place))
    parts.append("</ul></div></div></body></html>")
    return "\n".join(parts) + "\n", expected, HTML_WARNINGS


def golden_lines(source, expected):
    lines = []
    for i, (target, anchor) in enumerate(expected):
        rec = {
            "source_title": source,
            "target_title": target,
            "anchor_text": anchor,
            "position_index": i,
        }
        lines.append(json.dumps(rec, ensure_ascii=False, separators=(",", ":")))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- corpus

FIRST = [
    "Akhilesh", "Rahul", "Priyanka", "Sanjay", "Ravi", "Sunita", "Anil", "Manoj",
    "Rakesh", "Pooja", "Vikas", "Neha", "Amit", "Sushil", "Lalu", "Rabri",
    "Tejashwi", "Nitish", "Ram", "Shyam", "Gopal", "Kailash", "Dinesh", "Mukesh",
    "Rajesh", "Suresh", "Ramesh", "Mahesh", "Ganesh", "Brijesh", "Kamlesh", "Umesh",
    "Savitri", "Kiran", "Meera", "Rekha", "Asha", "Usha", "Shobha", "Kusum",
    "Arvind", "Alok", "Ashok", "Vinod", "Pramod", "Satyendra", "Jitendra", "Dharmendra",
    "Bhupendra", "Shailendra", "Raghuvansh", "Shatrughan", "Manohar", "Jagdish",
]
MIDDLE = ["", "", "", "", "Kumar ", "Prasad ", "Singh ", "Nath ", "Narayan ", "Chandra "]
LAST = [
    "Yadav", "Singh", "Kumar", "Sharma", "Verma", "Mishra", "Tiwari", "Pandey",
    "Dubey", "Chaubey", "Shukla", "Tripathi", "Srivastava", "Gupta", "Jha", "Thakur",
    "Paswan", "Maurya", "Kushwaha", "Chauhan", "Rathore", "Rajput", "Nishad", "Rajbhar",
    "Prajapati", "Saxena", "Agarwal", "Bansal", "Chaudhary", "Manjhi",
]

LOC = [
    "Lucknow", "Kanpur", "Varanasi", "Prayagraj", "Agra", "Mathura", "Vrindavan",
    "Ayodhya", "Gorakhpur", "Meerut", "Aligarh", "Bareilly", "Moradabad", "Jhansi",
    "Azamgarh", "Ballia", "Ghazipur", "Jaunpur", "Mirzapur", "Sultanpur", "Faizabad",
    "Basti", "Deoria", "Etawah", "Mainpuri", "Firozabad", "Rae Bareli", "Amethi",
    "Patna", "Gaya", "Bhagalpur", "Muzaffarpur", "Darbhanga", "Chhapra", "Siwan",
    "Bhopal", "Indore", "Gwalior", "Jabalpur", "Jaipur", "Jodhpur", "Ajmer",
    "Dehradun", "Haridwar", "Rishikesh", "Ranchi", "Dhanbad", "Ganga", "Yamuna",
    "Ghaghara", "Chambal",
]

ORG = [
    "Samajwadi Party", "Bahujan Samaj Party", "Bharatiya Janata Party",
    "Indian National Congress", "Rashtriya Janata Dal", "Janata Dal (United)",
    "Rashtriya Lok Dal", "Apna Dal", "Lok Janshakti Party", "Suheldev Bharatiya Samaj Party",
    "Banaras Hindu University", "Aligarh Muslim University", "University of Lucknow",
    "IIT Kanpur", "IIT BHU", "Patna University", "Allahabad University",
    "Dainik Jagran", "Amar Ujala", "Hindustan Dainik", "Prabhat Khabar",
    "Uttar Pradesh Police", "Bihar Police", "Indian Railways", "North Eastern Railway",
    "State Bank of India", "Punjab National Bank", "Bank of Baroda",
    "Lucknow Super Giants", "Kanpur Development Authority", "Doordarshan",
    "All India Radio", "Akashvani Lucknow", "Election Commission of India",
    "Allahabad High Court", "Patna High Court", "UPSRTC", "BSRTC", "AIIMS Patna",
]

MISC = [
    "Chhath Puja", "Kumbh Mela", "Holi", "Diwali", "Dussehra", "Makar Sankranti",
    "Bhojpuri", "Awadhi", "Maithili", "Braj Bhasha", "Ramcharitmanas",
    "Hindi Diwas", "Ganga Aarti", "Nag Panchami", "Teej",
]


def people(n, rng):
    seen = set()
    out = []
    while len(out) < n:
        name = f"{rng.choice(FIRST)} {rng.choice(MIDDLE)}{rng.choice(LAST)}"
        if name not in seen and name not in LOC and name not in ORG:
            seen.add(name)
            out.append(name)
    return out


def corpus():
    assert (len(LOC), len(ORG), len(MISC)) == (51, 39, 15), (len(LOC), len(ORG), len(MISC))
    rng = random.Random(20180520)
    rows = [(p, "PER") for p in people(195, rng)]
    rows += [(x, "LOC") for x in LOC]
    rows += [(x, "ORG") for x in ORG]
    rows += [(x, "MISC") for x in MISC]
    surfaces = [s for s, _ in rows]
    assert len(set(surfaces)) == len(surfaces) == 300
    rows.sort()
    return rows


def annotation_subset(rows):
    """50 entities keeping the 65/17/13/5 mix: 33 PER, 8 LOC, 6 ORG, 3 MISC."""
    want = {"PER": 33, "LOC": 8, "ORG": 6, "MISC": 3}
    rng = random.Random(50)
    picked = []
    for label, k in want.items():
        members = [r for r in rows if r[1] == label]
        picked += rng.sample(members, k)
    picked.sort()
    return picked


def tsv(rows):
    return "".join(f"{s}\t{l}\n" for s, l in rows)


def main():
    pages = HERE / "pages"
    golden = HERE / "golden"
    pages.mkdir(exist_ok=True)
    golden.mkdir(exist_ok=True)

    body, expected, warnings = wikitext_page()
    (pages / f"{WT_TITLE}.wikitext").write_text(body, encoding="utf-8")
    (golden / "wikitext.links.jsonl").write_text(golden_lines(WT_TITLE, expected), encoding="utf-8")
    (golden / "wikitext.warnings").write_text(f"{warnings}\n")
    print(f"wikitext: {len(expected)} links, {warnings} warnings")

    body, expected, warnings = html_page()
    (pages / f"{HTML_TITLE}.html").write_text(body, encoding="utf-8")
    (golden / "html.links.jsonl").write_text(golden_lines(HTML_TITLE, expected), encoding="utf-8")
    (golden / "html.warnings").write_text(f"{warnings}\n")
    print(f"html: {len(expected)} links, {warnings} warnings")

    rows = corpus()
    (HERE / "corpus.tsv").write_text(tsv(rows), encoding="utf-8")
    (HERE / "annotation_50.tsv").write_text(tsv(annotation_subset(rows)), encoding="utf-8")
    print(f"corpus: {len(rows)} entities")


if __name__ == "__main__":
    main()
