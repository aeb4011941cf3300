WQ_ROLE = "You are an expert editor scoring research reports against a fixed rubric. Answer in JSON."

WQ_PROMPT = """Research question: {query}

Score the report on {dimension}. Give each sub-dimension an integer from 0 to 100 following its description:
{rubric}

Report:
{report}"""

KIC_ROLE = "You check research reports against a checklist. You judge only from the report text. Answer in JSON."

KIC_PROMPT = """Question: {question}

Answer strictly from the report below; do not use outside knowledge. Answer "yes" only if the report states
the fact or it follows directly from what the report states, otherwise "no". Quote the report text you relied on.

Report:
{report}"""

RQ_ROLE = (
    "You are an evaluation agent checking the reasoning of a research report. "
    "You follow a validation plan step by step and use tools to check the report's arguments."
)

RQ_STEP_PROMPT = """Query: {query}
Current date: {today}
Available tools: {tools}

Question: {question}
Validation plan:
1. Extract: {extract_step}
2. Verify: {verify_step}
3. Compare: {compare_step}

Report:
{report}

Observations so far:
{observations}

Steps left: {steps_left}
{note}
Choose the next action. Use a tool with up to {parallel} arguments (search queries, or URLs for url_fetch)
to carry out the verify step, or "finish" once the checks are done."""

RQ_VERDICT_PROMPT = """Question: {question}
Validation plan:
1. Extract: {extract_step}
2. Verify: {verify_step}
3. Compare: {compare_step}

Report:
{report}

Checks run:
{observations}
{incomplete}
Compare the report's reasoning with what the checks found. The score starts at 10; list one deduction per
flaw, choosing its category from this schedule of point costs:
{schedule}
List no deductions if the reasoning holds up."""

INCOMPLETE_NOTE = "\nThe step budget ran out before the plan was finished; judge from the checks above only.\n"
