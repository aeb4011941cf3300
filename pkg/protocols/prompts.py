SELECTOR_ROLE = (
    "You plan research for evaluating reports written in answer to a query. "
    "Choose only the retrieval tools that will help; extra tools add noise."
)

SELECTOR_PROMPT = """Query: {query}

Tools:
- web_search: general web search (always used)
- url_fetch: read a web page (always used)
- arxiv: search scientific preprints
- github: search code repositories

List the tools this query needs."""

AGENT_ROLE = (
    "You are a research agent building an evaluation protocol for a query. "
    "You work in steps: call tools to gather current evidence, then draft items grounded in what you read. "
    "You never see any report written for the query."
)

KIC_GOAL = """Draft a checklist of the key information a complete, up-to-date answer to the query must contain.
Each item is a yes/no question that can be checked against a report's text alone, for example
"Does the report state that ...?". Mention exact figures, names and dates where the sources give them,
and prefer the most recent facts: the answer should reflect the situation as of the current date.
Draft between {min_items} and {max_items} items in total."""

RQ_GOAL = """Draft open-ended analytical questions that test the reasoning a strong answer to the query needs.
Pair each question with a validation plan:
- extract_step: which reasoning chain or argument to pull out of a report;
- verify_step: which external checks to run on that chain, using only these tools: {tools};
- verify_tools: the tools the verify step uses;
- compare_step: how to compare the report's reasoning with what the checks find.
Draft between {min_items} and {max_items} questions in total."""

STEP_PROMPT = """Query: {query}
Current date: {today}
Available tools: {tools}

{goal}

Observations so far:
{observations}

Items drafted so far: {drafted}
Steps left: {steps_left}
{note}
Choose the next action. Use a tool with up to {parallel} arguments (search queries, or URLs for url_fetch),
or "finish" when enough items are drafted. Add any new items under "items"; every item must cite
grounding_urls taken from the observations."""

PLAN_REPAIR_PROMPT = """Query: {query}
Question: {question}

Its validation plan used tools that are not available: {stray}.
Rewrite the plan so the verify step uses only: {tools}.

Previous plan:
{plan}"""
