"""Regenerate the N-Triples fixtures under src/okn_mcp/fixture/data/.

The mini federation mirrors the registry roster: six small graphs plus a
~30-node disease ontology. In the NDE-like catalog most datasets carry a
subtype of cardiovascular disorder and only a few carry the root term.

    python scripts/build_fixtures.py
"""

from pathlib import Path

OUT = Path(__file__).resolve().parents[1] / "src" / "okn_mcp" / "fixture" / "data"

RDF_TYPE = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type"
RDF = "http://www.w3.org/1999/02/22-rdf-syntax-ns#"
RDFS_LABEL = "http://www.w3.org/2000/01/rdf-schema#label"
SUBCLASS = "http://www.w3.org/2000/01/rdf-schema#subClassOf"
OWL_CLASS = "http://www.w3.org/2002/07/owl#Class"
EXACT_SYN = "http://www.geneontology.org/formats/oboInOwl#hasExactSynonym"
XSD = "http://www.w3.org/2001/XMLSchema#"
SCHEMA = "http://schema.org/"
OBO = "http://purl.obolibrary.org/obo/"


def mondo(local):
    return f"{OBO}MONDO_{local}"


# key: (local id, label, parent keys, exact synonyms)
DISEASES = {
    "disease": ("0000001", "disease", [], []),
    "cvd": ("0004995", "cardiovascular disorder", ["disease"], ["cardiovascular disease"]),
    "heart": ("9900001", "heart disorder", ["cvd"], ["heart disease"]),
    "arrest": ("9900002", "cardiac arrest", ["heart"], []),
    "arrhythmia": ("9900003", "cardiac arrhythmia", ["heart"], []),
    "afib": ("9900004", "atrial fibrillation", ["arrhythmia"], []),
    "brugada": ("9900005", "Brugada syndrome", ["arrhythmia"], []),
    "hf": ("9900006", "heart failure", ["heart"], []),
    "mi": ("9900007", "myocardial infarction", ["heart"], ["heart attack"]),
    "chd": ("9900008", "congenital heart disease", ["heart"], []),
    "holt": ("9900009", "Holt-Oram syndrome", ["chd"], []),
    "vascular": ("9900010", "vascular disease", ["cvd"], []),
    "athero": ("9900011", "atherosclerosis", ["vascular"], []),
    "htn": ("9900012", "hypertensive disorder", ["vascular"], ["hypertension"]),
    "cerebro": ("9900013", "cerebrovascular disorder", ["vascular"], []),
    "stroke": ("9900014", "stroke disorder", ["cerebro", "nervous"], ["stroke"]),
    "aneurysm": ("9900015", "aortic aneurysm", ["vascular"], []),
    "loeys": ("9900016", "Loeys-Dietz syndrome", ["aneurysm"], []),
    "nervous": ("9900020", "nervous system disorder", ["disease"], []),
    "epilepsy": ("9900021", "epilepsy", ["nervous"], []),
    "migraine": ("9900022", "migraine disorder", ["nervous"], []),
    "infect": ("9900030", "infectious disease", ["disease"], []),
    "flu": ("9900031", "influenza", ["infect"], []),
    "covid": ("9900032", "COVID-19", ["infect"], []),
    "cancer": ("9900040", "cancer", ["disease"], []),
    "lungca": ("9900041", "lung cancer", ["cancer"], []),
    "breastca": ("9900042", "breast cancer", ["cancer"], []),
    "rare_cardio_skin": ("9900050", "cardiofaciocutaneous syndrome", ["chd"], []),
    "pericard": ("9900051", "pericarditis", ["heart"], []),
    "valve": ("9900052", "heart valve disease", ["heart"], []),
}

# (disease key, number of datasets annotated only with it)
SINGLE_ANNOTATIONS = [
    ("cvd", 3), ("heart", 4), ("arrest", 6), ("arrhythmia", 2), ("afib", 5), ("brugada", 1),
    ("hf", 4), ("mi", 3), ("chd", 1), ("holt", 1), ("vascular", 1), ("athero", 4), ("htn", 4),
    ("cerebro", 1), ("stroke", 3), ("aneurysm", 1), ("loeys", 1),
    ("epilepsy", 3), ("migraine", 2), ("flu", 4), ("covid", 5), ("lungca", 3), ("breastca", 2),
    ("disease", 1),
]
MULTI_ANNOTATIONS = [["afib", "hf"], ["stroke", "epilepsy"], ["htn", "cvd"], ["flu", "mi"], ["covid", "lungca"]]


def lit(value, datatype=None, lang=None):
    text = '"' + str(value).replace("\\", "\\\\").replace('"', '\\"') + '"'
    if lang:
        return f"{text}@{lang}"
    if datatype:
        return f"{text}^^<{datatype}>"
    return text


def t(s, p, o):
    o_text = o if o.startswith('"') else f"<{o}>"
    return f"<{s}> <{p}> {o_text} ."


def write(name, lines):
    (OUT / name).write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"{name}: {len(lines)} triples")


def ontology():
    lines = []
    for local, label, parents, syns in DISEASES.values():
        u = mondo(local)
        lines.append(t(u, RDF_TYPE, OWL_CLASS))
        lines.append(t(u, RDFS_LABEL, lit(label)))
        for s in syns:
            lines.append(t(u, EXACT_SYN, lit(s)))
        for p in parents:
            lines.append(t(u, SUBCLASS, mondo(DISEASES[p][0])))
    # a non-disease ontology term so namespace handling has something to skip
    lines.append(t(f"{OBO}UBERON_0002370", RDFS_LABEL, lit("thymus")))
    lines.append(t(f"{OBO}UBERON_0002370", RDF_TYPE, OWL_CLASS))
    return lines


def nde():
    base = "https://example.org/nde/dataset/"
    lines = []
    n = 0

    def dataset(keys):
        nonlocal n
        n += 1
        d = f"{base}D{n:03d}"
        lines.append(t(d, RDF_TYPE, SCHEMA + "Dataset"))
        lines.append(t(d, SCHEMA + "name", lit(f"Dataset {n:03d}: " + " / ".join(DISEASES[k][1] for k in keys))))
        lines.append(t(d, SCHEMA + "identifier", lit(f"NDE-{n:03d}")))
        for k in keys:
            lines.append(t(d, SCHEMA + "healthCondition", mondo(DISEASES[k][0])))
        lines.append(t(d, SCHEMA + "species", "http://purl.obolibrary.org/obo/NCBITaxon_9606"))

    for key, count in SINGLE_ANNOTATIONS:
        for _ in range(count):
            dataset([key])
    for keys in MULTI_ANNOTATIONS:
        dataset(keys)
    return lines


GENES = [("7157", "TP53"), ("672", "BRCA1"), ("3569", "IL6"), ("7124", "TNF"), ("2147", "F2"), ("1277", "COL1A1")]
MOUSE = [("98834", "Trp53", "7157"), ("104537", "Brca1", "672"), ("96559", "Il6", "3569"), ("104798", "Tnf", "7124"), ("88380", "F2", "2147")]


def spoke_okn():
    s = "https://purl.org/okn/frink/kg/spoke-okn/schema/"
    lines = []
    for gid, sym in GENES:
        g = f"http://identifiers.org/ncbigene/{gid}"
        lines += [t(g, RDF_TYPE, s + "Gene"), t(g, RDFS_LABEL, lit(sym))]
    for key in ("afib", "hf", "stroke", "lungca"):
        d = mondo(DISEASES[key][0])
        lines += [t(d, RDF_TYPE, s + "Disease"), t(d, RDFS_LABEL, lit(DISEASES[key][1]))]
    assoc = [("afib", "3569"), ("hf", "7124"), ("hf", "3569"), ("stroke", "2147"), ("lungca", "7157"), ("lungca", "672")]
    for key, gid in assoc:
        lines.append(t(mondo(DISEASES[key][0]), s + "ASSOCIATES_DaG", f"http://identifiers.org/ncbigene/{gid}"))
    for cid, name, treats in (("15365", "aspirin", "stroke"), ("6801", "metformin", "hf")):
        c = f"{OBO}CHEBI_{cid}"
        lines += [t(c, RDF_TYPE, s + "Compound"), t(c, RDFS_LABEL, lit(name)),
                  t(c, s + "TREATS_CtD", mondo(DISEASES[treats][0]))]
    return lines


def spoke_genelab():
    s = "https://purl.org/okn/frink/kg/spoke-genelab/schema/"
    lines = []
    study = "https://example.org/genelab/study/OSD-244"
    lines += [t(study, RDF_TYPE, s + "Study"), t(study, RDFS_LABEL, lit("Rodent Research-6 thymus RNA-seq")),
              t(study, s + "organism", lit("Mus musculus"))]
    assays = []
    for days in (30, 60):
        a = f"https://example.org/genelab/assay/OSD-244-FLT-vs-GC-{days}d"
        assays.append(a)
        lines += [t(a, RDF_TYPE, s + "Assay"), t(a, s + "PERFORMED_SpAS", study),
                  t(a, s + "duration_days", lit(days, XSD + "integer"))]
    for mgi, sym, human in MOUSE:
        m = f"http://identifiers.org/mgi/MGI:{mgi}"
        lines += [t(m, RDF_TYPE, s + "MGene"), t(m, RDFS_LABEL, lit(sym)),
                  t(m, s + "IS_ORTHOLOG_MGiG", f"http://identifiers.org/ncbigene/{human}")]
    n = 0
    for i, a in enumerate(assays):
        for j, (mgi, sym, _) in enumerate(MOUSE):
            n += 1
            st = f"https://example.org/genelab/edge/{n}"
            lfc = round((j - 2) * 0.75 + i * 0.5, 2)
            padj = round(0.001 * (j + 1) * (i + 1), 4)
            lines += [
                t(st, RDF_TYPE, RDF + "Statement"),
                t(st, RDF + "subject", a),
                t(st, RDF + "predicate", s + "MEASURED_DIFFERENTIAL_EXPRESSION_ASmMG"),
                t(st, RDF + "object", f"http://identifiers.org/mgi/MGI:{mgi}"),
                t(st, s + "log2fc", lit(lfc, XSD + "double")),
                t(st, s + "adj_p_value", lit(padj, XSD + "double")),
            ]
            lines.append(t(a, s + "MEASURED_DIFFERENTIAL_EXPRESSION_ASmMG", f"http://identifiers.org/mgi/MGI:{mgi}"))
    return lines


def biobricks():
    s = "https://purl.org/okn/frink/kg/biobricks/schema/"
    lines = []
    chems = [("15365", "aspirin", "hepatotoxicity"), ("6801", "metformin", "lactic acidosis"),
             ("27732", "caffeine", "cardiotoxicity"), ("16236", "ethanol", "hepatotoxicity")]
    for cid, name, outcome in chems:
        c = f"{OBO}CHEBI_{cid}"
        lines += [t(c, RDF_TYPE, s + "Chemical"), t(c, RDFS_LABEL, lit(name)),
                  t(c, s + "toxicityOutcome", lit(outcome, lang="en"))]
        assay = f"https://example.org/biobricks/assay/{cid}"
        lines += [t(assay, RDF_TYPE, s + "ToxAssay"), t(assay, s + "testedChemical", c),
                  t(assay, s + "activityScore", lit(round(len(name) / 10, 2), XSD + "decimal"))]
    return lines


def prokn():
    s = "https://purl.org/okn/frink/kg/prokn/schema/"
    lines = []
    prots = [("P04637", "Cellular tumor antigen p53", "0006915"), ("P38398", "BRCA1", "0006281"),
             ("P05231", "Interleukin-6", "0006955")]
    for acc, name, go in prots:
        p = f"http://purl.uniprot.org/uniprot/{acc}"
        lines += [t(p, RDF_TYPE, s + "Protein"), t(p, RDFS_LABEL, lit(name)),
                  t(p, s + "involvedIn", f"{OBO}GO_{go}")]
    for go, label in (("0006915", "apoptotic process"), ("0006281", "DNA repair"), ("0006955", "immune response")):
        lines += [t(f"{OBO}GO_{go}", RDF_TYPE, s + "BiologicalProcess"), t(f"{OBO}GO_{go}", RDFS_LABEL, lit(label))]
    return lines


def gene_expression_atlas():
    s = "https://purl.org/okn/frink/kg/gene-expression-atlas/schema/"
    lines = []
    for ens, sym in (("ENSG00000141510", "TP53"), ("ENSG00000136244", "IL6"), ("ENSG00000232810", "TNF")):
        g = f"http://identifiers.org/ensembl/{ens}"
        lines += [t(g, RDF_TYPE, s + "Gene"), t(g, RDFS_LABEL, lit(sym))]
        for tissue in ("0002370", "0000948"):
            e = f"https://example.org/gxa/expr/{ens}-{tissue}"
            lines += [t(e, RDF_TYPE, s + "Expression"), t(e, s + "gene", g),
                      t(e, s + "tissue", f"{OBO}UBERON_{tissue}"),
                      t(e, s + "tpm", lit(round(int(tissue) % 97 + len(sym) * 1.5, 1), XSD + "decimal"))]
    return lines


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    write("ontology.nt", ontology())
    write("nde.nt", nde())
    write("spoke-okn.nt", spoke_okn())
    write("spoke-genelab.nt", spoke_genelab())
    write("biobricks.nt", biobricks())
    write("prokn.nt", prokn())
    write("gene-expression-atlas.nt", gene_expression_atlas())


if __name__ == "__main__":
    main()
