"""
Django settings for the report evaluation engine.

The project has no web surface: every entry point is a management command
(see runs/management/commands). Values are read from the environment after
loading the optional .env file next to manage.py; a per-run YAML file passed
with --config overrides them (see runs/config.py).
"""
import os
from pathlib import Path
from dotenv import load_dotenv

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

dot_env = os.path.join(BASE_DIR, '.env')
load_dotenv(dotenv_path=dot_env)

SECRET_KEY = os.getenv('SECRET_KEY', 'evaluation-engine-has-no-sessions')

DEBUG = (os.getenv('DEBUG', 'False') == 'True')


# Application definition

INSTALLED_APPS = [
    'rest_framework',

    'conf',
    'reports',
    'gateway',
    'evidence',
    'protocols',
    'workflow',
    'adaptive',
    'scoring',
    'harness',
    'runs',
]

# File-backed JSON stores only.
DATABASES = {}

LANGUAGE_CODE = 'en-us'

TIME_ZONE = 'UTC'

USE_I18N = False

USE_TZ = True

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'


# Run paths

PROTOCOL_DIR = os.getenv('PROTOCOL_DIR', os.path.join(BASE_DIR, 'var', 'protocols'))
CACHE_DIR = os.getenv('CACHE_DIR', os.path.join(BASE_DIR, 'var', 'cache'))
FIXTURE_DIR = os.getenv('FIXTURE_DIR', os.path.join(BASE_DIR, 'var', 'fixtures'))
RESULTS_DIR = os.getenv('RESULTS_DIR', os.path.join(BASE_DIR, 'var', 'results'))

# live | record | replay
BACKEND_MODE = os.getenv('BACKEND_MODE', 'replay')
# Fixed ISO date used as "today" in judge prompts; empty means the real date.
RUN_DATE = os.getenv('RUN_DATE') or None


# LLM gateway

LLM_BASE_URL = os.getenv('LLM_BASE_URL', 'https://api.openai.com/v1')
LLM_API_KEY = os.getenv('LLM_API_KEY')
LLM_MODEL = os.getenv('LLM_MODEL', 'gpt-4o')
LLM_TIMEOUT = float(os.getenv('LLM_TIMEOUT', '120'))
LLM_MAX_CONCURRENCY = int(os.getenv('LLM_MAX_CONCURRENCY', '8'))
JUDGE_MAX_ATTEMPTS = int(os.getenv('JUDGE_MAX_ATTEMPTS', '3'))
# Bumped whenever an authored prompt changes, so old fixtures stop matching.
PROMPT_VERSION = os.getenv('PROMPT_VERSION', '1')


# Evidence tools

SEARCH_BASE_URL = os.getenv('SEARCH_BASE_URL', 'https://api.search.example/v1/search')
SEARCH_API_KEY = os.getenv('SEARCH_API_KEY')
SEARCH_MAX_RESULTS = int(os.getenv('SEARCH_MAX_RESULTS', '8'))
SEARCH_RETRIES = int(os.getenv('SEARCH_RETRIES', '3'))
SEARCH_BACKOFF = float(os.getenv('SEARCH_BACKOFF', '2'))
ARXIV_BASE_URL = os.getenv('ARXIV_BASE_URL', 'https://export.arxiv.org/api/query')
GITHUB_BASE_URL = os.getenv('GITHUB_BASE_URL', 'https://api.github.com/search/repositories')
GITHUB_TOKEN = os.getenv('GITHUB_TOKEN')

FETCH_TIMEOUT = float(os.getenv('FETCH_TIMEOUT', '10'))
FETCH_RETRIES = int(os.getenv('FETCH_RETRIES', '2'))
FETCH_PER_HOST = int(os.getenv('FETCH_PER_HOST', '4'))
FETCH_CONCURRENCY = int(os.getenv('FETCH_CONCURRENCY', '16'))
FETCH_USER_AGENT = os.getenv('FETCH_USER_AGENT', 'report-evaluation-engine/1.0')
FETCH_RESPECT_ROBOTS = (os.getenv('FETCH_RESPECT_ROBOTS', 'True') == 'True')


# Protocol creation

PROTOCOL_STEP_BUDGET = int(os.getenv('PROTOCOL_STEP_BUDGET', '20'))
KIC_MIN_ITEMS = int(os.getenv('KIC_MIN_ITEMS', '8'))
KIC_MAX_ITEMS = int(os.getenv('KIC_MAX_ITEMS', '16'))
RQ_MIN_ITEMS = int(os.getenv('RQ_MIN_ITEMS', '3'))
RQ_MAX_ITEMS = int(os.getenv('RQ_MAX_ITEMS', '6'))


# Protocol execution

EVALUATION_WORKERS = int(os.getenv('EVALUATION_WORKERS', '4'))
FACTUALITY_MAX_CLAIMS = int(os.getenv('FACTUALITY_MAX_CLAIMS', '30'))
FACTUALITY_QUERIES_PER_CLAIM = int(os.getenv('FACTUALITY_QUERIES_PER_CLAIM', '3'))
FACTUALITY_FETCH_TOP = int(os.getenv('FACTUALITY_FETCH_TOP', '5'))
RQ_STEP_BUDGET = int(os.getenv('RQ_STEP_BUDGET', '15'))


# Harness

SWEEP_SEED = int(os.getenv('SWEEP_SEED', '15'))


LOGS_DIR = os.path.join(BASE_DIR, 'logs')
if not os.path.exists(LOGS_DIR):
    os.makedirs(LOGS_DIR)


def _rotating(filename, level='INFO'):
    return {
        'level': level,
        'class': 'logging.handlers.TimedRotatingFileHandler',
        'filename': os.path.join(LOGS_DIR, filename),
        'formatter': 'verbose',
        'when': 'midnight',
        'interval': 1,
        'backupCount': 7,
    }


LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '{levelname} {asctime} {module} {message}',
            'style': '{',
        },
        'simple': {
            'format': '{levelname} {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'level': 'INFO',
            'class': 'logging.StreamHandler',
            'formatter': 'simple',
        },
        'file_django': _rotating('django.log', 'WARNING'),
        'file_gateway': _rotating('gateway.log', 'DEBUG'),
        'file_evidence': _rotating('evidence.log', 'DEBUG'),
        'file_protocol': _rotating('protocol.log'),
        'file_evaluation': _rotating('evaluation.log'),
        'file_harness': _rotating('harness.log'),
        'file_run': _rotating('run.log'),
    },
    'loggers': {
        'django': {
            'handlers': ['file_django'],
            'level': 'WARNING',
            'propagate': True,
        },
        'gateway_log': {
            'handlers': ['file_gateway'],
            'level': 'DEBUG',
            'propagate': False,
        },
        'evidence_log': {
            'handlers': ['file_evidence'],
            'level': 'DEBUG',
            'propagate': False,
        },
        'protocol_log': {
            'handlers': ['file_protocol'],
            'level': 'INFO',
            'propagate': False,
        },
        'evaluation_log': {
            'handlers': ['file_evaluation'],
            'level': 'INFO',
            'propagate': False,
        },
        'harness_log': {
            'handlers': ['file_harness'],
            'level': 'INFO',
            'propagate': False,
        },
        'run_log': {
            'handlers': ['file_run', 'console'],
            'level': 'INFO',
            'propagate': False,
        },
    },
}
