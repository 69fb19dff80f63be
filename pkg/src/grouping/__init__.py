from src.grouping.frequency_grouping import FrequencyGroup, group_frequency, group_frequency_columns
from src.grouping.notifications import EventNotification, NotificationKind, gen_notification, summary_record
from src.grouping.time_grouping import OpenEvent, TimeGrouper, TimeStep, group_time, match_groups
