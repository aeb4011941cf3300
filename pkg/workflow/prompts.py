JUDGE_ROLE = "You are a careful fact-checking assistant. Follow the instructions exactly and answer in JSON."

KEY_CLAIMS_PROMPT = """Research question: {query}
Current date: {today}

Extract up to {limit} of the most salient factual claims the report makes in answering the research question.
Resolve temporal references ("currently", "this year") against the current date. For each claim give a
self-contained statement and the exact report text it comes from.

Report:
{report}"""

VERIFIABLE_CLAIMS_PROMPT = """List every factual or argumentative assertion in the report, each with the exact
report text it comes from, and categorize it:
- verifiable: a checkable statement about the world;
- meta_talk: text about the report itself (e.g. "The following section discusses ...");
- subjective: opinion or commentary;
- common_knowledge: facts nobody would cite (e.g. "Water boils at 100 °C at sea level").

Report:
{report}"""

NEUTRAL_QUERIES_PROMPT = """Claim: {claim}
{cutoff}
Write 2 to 4 neutral web search queries that would find evidence for OR against this claim.
Do not repeat the claim's specific values, figures or conclusion: to check "inflation dropped to 2%",
search for "current inflation rate", not "inflation dropped to 2%"."""

SUPPORTING_PROMPT = """Claim: {claim}

From the documents below, copy exactly the passages that explicitly confirm the claim.
Return an empty list if none do.

{documents}"""

OPPOSING_PROMPT = """Claim: {claim}

From the documents below, copy exactly the passages that contradict or refute the claim.
Look for them actively. Return an empty list if none do.

{documents}"""

FACTUALITY_PROMPT = """Claim: {claim}

Supporting evidence:
{supporting}

Opposing evidence:
{opposing}

Label the claim:
- Supported: evidence explicitly confirms the claim;
- PartiallySupported: evidence supports some aspects but differs on details or is mixed;
- Contradicted: evidence clearly refutes the claim;
- Unverifiable: evidence is insufficient, indirect, or too weak for a reliable determination."""

FAITHFULNESS_PROMPT = """Claim: {claim}
Cited source: {url}

Source text:
{source}

Does the cited source support the claim? Label it:
- Supported: the source states the claim;
- PartiallySupported: the source supports part of the claim;
- Neutral: the source is on a different point and neither supports nor contradicts the claim;
- Contradicted: the source contradicts the claim;
- Unverifiable: the source text is too thin to decide."""

DOMAIN_PROMPT = """Domain: {domain}

Rate the authority of this domain as a source, considering institutional backing, historical reliability
and editorial standards. Pick a category (Government, Academic, News, Commercial, Other) and an integer score:
- 9-10 Definitive authority: gold-standard sources with institutional credibility (government agencies,
  top-tier academic institutions);
- 7-8 High authority: trustworthy and credible sources (established news organizations);
- 4-6 Moderate authority: acceptable but not ideal sources (general commercial sites);
- 1-3 Low authority: unreliable sources with questionable credibility (social media, unverified blogs)."""


def numbered_documents(documents, limit):
    return '\n\n'.join(
        f"[{number}] {document.url}\n{document.content_text[:limit]}"
        for number, document in enumerate(documents, start=1)
    )


def bullet_passages(passages):
    return '\n'.join(f"- ({url}) {passage}" for url, passage in passages) or '(none)'
