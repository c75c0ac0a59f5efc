"""
Configuração do Celery para a execução distribuída dos ensembles
"""
from celery import Celery
from opmean.utils.settings import settings

# Configuração do Celery
celery_app = Celery(
    "opmean_tasks",
    broker=settings.CELERY_BROKER_URL,
    backend=settings.CELERY_RESULT_BACKEND,
    include=[
        'opmean.utils.tasks.trial_tasks',
    ]
)

# Configurações do Celery
celery_app.conf.update(
    # Configurações gerais
    task_serializer='json',
    accept_content=['json'],
    result_serializer='json',
    enable_utc=True,

    # Sem broker configurado as tarefas rodam no próprio processo
    task_always_eager=settings.CELERY_ALWAYS_EAGER,
    task_eager_propagates=True,

    # Configurações de retry
    task_acks_late=True,
    worker_prefetch_multiplier=1,

    # Configurações de resultado
    result_expires=3600,  # 1 hora

    # Configurações de roteamento
    task_routes={
        'opmean.utils.tasks.trial_tasks.*': {'queue': 'trials'},
    },
)
