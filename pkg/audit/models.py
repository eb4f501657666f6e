from django.db import models


class RunLog(models.Model):
    """One row per management command run"""

    COMMAND_CHOICES = [
        ('simulate', 'Simulate Example'),
        ('fit_dpm', 'Fit DPM'),
        ('fit_lddp', 'Fit LDDP'),
        ('summarize_partition', 'Summarize Partition'),
        ('unl', 'UNL Posterior'),
        ('mi_curve', 'UNL/MI Curve'),
        ('pipeline_marginal', 'Marginal Pipeline'),
        ('pipeline_conditional', 'Conditional Pipeline'),
        ('ppc', 'Posterior Predictive Check'),
    ]

    command = models.CharField(max_length=50, choices=COMMAND_CHOICES)
    timestamp = models.DateTimeField(auto_now_add=True, db_index=True)
    seed = models.BigIntegerField(null=True, blank=True)
    desk_scale = models.BooleanField(default=False)
    parameters = models.JSONField(
        default=dict,
        blank=True,
        help_text="Resolved run configuration"
    )
    summary = models.JSONField(
        default=dict,
        blank=True,
        help_text="Headline results of the run"
    )
    output_dir = models.CharField(max_length=500, blank=True)
    duration_seconds = models.FloatField(null=True, blank=True)
    success = models.BooleanField(default=True, help_text="Whether the run succeeded")
    error_message = models.TextField(blank=True, help_text="Error details if failed")

    class Meta:
        ordering = ['-timestamp']
        indexes = [
            models.Index(fields=['-timestamp']),
            models.Index(fields=['command', '-timestamp']),
            models.Index(fields=['success']),
        ]

    def __str__(self):
        status = "ok" if self.success else "failed"
        return f"{self.get_command_display()} ({status}) at {self.timestamp.strftime('%Y-%m-%d %H:%M:%S')}"

    @classmethod
    def log_run(cls, command, parameters=None, summary=None, seed=None, desk_scale=False,
                output_dir='', duration_seconds=None, success=True, error_message=''):
        """Helper method to create run log entries"""
        return cls.objects.create(
            command=command,
            seed=seed,
            desk_scale=desk_scale,
            parameters=parameters or {},
            summary=summary or {},
            output_dir=str(output_dir),
            duration_seconds=duration_seconds,
            success=success,
            error_message=error_message,
        )
