# Generated by Django 5.2.10 on 2026-10-18 09:12

from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='RunLog',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('command', models.CharField(choices=[('simulate', 'Simulate Example'), ('fit_dpm', 'Fit DPM'), ('fit_lddp', 'Fit LDDP'), ('summarize_partition', 'Summarize Partition'), ('unl', 'UNL Posterior'), ('mi_curve', 'UNL/MI Curve'), ('pipeline_marginal', 'Marginal Pipeline'), ('pipeline_conditional', 'Conditional Pipeline'), ('ppc', 'Posterior Predictive Check')], max_length=50)),
                ('timestamp', models.DateTimeField(auto_now_add=True, db_index=True)),
                ('seed', models.BigIntegerField(blank=True, null=True)),
                ('desk_scale', models.BooleanField(default=False)),
                ('parameters', models.JSONField(blank=True, default=dict, help_text='Resolved run configuration')),
                ('summary', models.JSONField(blank=True, default=dict, help_text='Headline results of the run')),
                ('output_dir', models.CharField(blank=True, max_length=500)),
                ('duration_seconds', models.FloatField(blank=True, null=True)),
                ('success', models.BooleanField(default=True, help_text='Whether the run succeeded')),
                ('error_message', models.TextField(blank=True, help_text='Error details if failed')),
            ],
            options={
                'ordering': ['-timestamp'],
                'indexes': [models.Index(fields=['-timestamp'], name='audit_runlo_timesta_3c1a7e_idx'), models.Index(fields=['command', '-timestamp'], name='audit_runlo_command_8f2d41_idx'), models.Index(fields=['success'], name='audit_runlo_success_b75e09_idx')],
            },
        ),
    ]
